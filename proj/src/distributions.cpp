#include "gamdiag/distributions.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "gamdiag/error.hpp"
#include "gamdiag/normal.hpp"

namespace gamdiag {

void Family::check_probability(double p) const {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("probability must lie in (0, 1), got " + std::to_string(p), "p");
}

namespace {

void require(bool ok, const char* family, const char* what) {
    if (!ok) throw DomainError(std::string(family) + ": " + what);
}

bool finite(double v) { return std::isfinite(v); }

// y log(y / mu) with the 0 log 0 = 0 convention.
double ylogy(double y, double mu) { return y > 0.0 ? y * std::log(y / mu) : 0.0; }

class Gaussian final : public Family {
public:
    std::string_view id() const override { return "gaussian"; }
    const std::vector<std::string>& param_names() const override {
        static const std::vector<std::string> names{"mu", "sigma"};
        return names;
    }
    Support support() const override { return Support::RealLine; }

    void validate(const Theta& t) const override {
        require(finite(t[0]), "gaussian", "mu must be finite");
        require(finite(t[1]) && t[1] > 0.0, "gaussian", "sigma must be > 0");
    }
    double cdf(double y, const Theta& t) const override {
        validate(t);
        return norm_cdf((y - t[0]) / t[1]);
    }
    double sf(double y, const Theta& t) const override {
        validate(t);
        return norm_sf((y - t[0]) / t[1]);
    }
    double quantile(double p, const Theta& t) const override {
        validate(t);
        check_probability(p);
        return t[0] + t[1] * norm_quantile(p);
    }
    Moments mean_var(const Theta& t) const override {
        validate(t);
        return {t[0], t[1] * t[1]};
    }
    double deviance(double y, const Theta& t) const override {
        validate(t);
        return (y - t[0]) * (y - t[0]);
    }
    double sample(const Theta& t, Rng& rng) const override {
        validate(t);
        std::normal_distribution<double> z;
        return t[0] + t[1] * z(rng);
    }
};

class Poisson final : public Family {
public:
    std::string_view id() const override { return "poisson"; }
    const std::vector<std::string>& param_names() const override {
        static const std::vector<std::string> names{"mu"};
        return names;
    }
    Support support() const override { return Support::Counts; }

    void validate(const Theta& t) const override {
        require(finite(t[0]) && t[0] > 0.0, "poisson", "mu must be > 0");
    }
    double cdf(double y, const Theta& t) const override {
        validate(t);
        if (y < 0.0) return 0.0;
        return boost::math::cdf(boost::math::poisson_distribution<>(t[0]), std::floor(y));
    }
    double sf(double y, const Theta& t) const override {
        validate(t);
        if (y < 0.0) return 1.0;
        return boost::math::cdf(boost::math::complement(boost::math::poisson_distribution<>(t[0]),
                                                        std::floor(y)));
    }
    double quantile(double p, const Theta& t) const override {
        validate(t);
        check_probability(p);
        double mu = t[0];
        double k = std::max(0.0, std::floor(mu + std::sqrt(mu) * norm_quantile(p)));
        while (k > 0.0 && cdf(k - 1.0, t) >= p) k -= 1.0;
        while (cdf(k, t) < p) k += 1.0;
        return k;
    }
    Moments mean_var(const Theta& t) const override {
        validate(t);
        return {t[0], t[0]};
    }
    double deviance(double y, const Theta& t) const override {
        validate(t);
        require(y >= 0.0 && y == std::floor(y), "poisson", "y must be a non-negative integer");
        return 2.0 * (ylogy(y, t[0]) - (y - t[0]));
    }
    double sample(const Theta& t, Rng& rng) const override {
        validate(t);
        std::poisson_distribution<std::int64_t> d(t[0]);
        return static_cast<double>(d(rng));
    }
};

class Binomial final : public Family {
public:
    std::string_view id() const override { return "binomial"; }
    const std::vector<std::string>& param_names() const override {
        static const std::vector<std::string> names{"mu", "size"};
        return names;
    }
    Support support() const override { return Support::BoundedCounts; }

    void validate(const Theta& t) const override {
        require(finite(t[0]) && t[0] >= 0.0 && t[0] <= 1.0, "binomial", "mu must lie in [0, 1]");
        require(finite(t[1]) && t[1] >= 1.0 && t[1] == std::floor(t[1]), "binomial",
                "size must be a positive integer");
    }
    double cdf(double y, const Theta& t) const override {
        validate(t);
        if (y < 0.0) return 0.0;
        if (y >= t[1]) return 1.0;
        return boost::math::cdf(boost::math::binomial_distribution<>(t[1], t[0]), std::floor(y));
    }
    double sf(double y, const Theta& t) const override {
        validate(t);
        if (y < 0.0) return 1.0;
        if (y >= t[1]) return 0.0;
        return boost::math::cdf(boost::math::complement(
            boost::math::binomial_distribution<>(t[1], t[0]), std::floor(y)));
    }
    double quantile(double p, const Theta& t) const override {
        validate(t);
        check_probability(p);
        double lo = 0.0, hi = t[1];
        while (lo < hi) {
            double mid = std::floor((lo + hi) / 2.0);
            if (cdf(mid, t) >= p)
                hi = mid;
            else
                lo = mid + 1.0;
        }
        return lo;
    }
    Moments mean_var(const Theta& t) const override {
        validate(t);
        return {t[1] * t[0], t[1] * t[0] * (1.0 - t[0])};
    }
    double deviance(double y, const Theta& t) const override {
        validate(t);
        double m = t[1];
        require(y >= 0.0 && y <= m && y == std::floor(y), "binomial", "y must be an integer in [0, size]");
        double mu = m * t[0];
        return 2.0 * (ylogy(y, mu) + ylogy(m - y, m - mu));
    }
    double sample(const Theta& t, Rng& rng) const override {
        validate(t);
        std::binomial_distribution<std::int64_t> d(static_cast<std::int64_t>(t[1]), t[0]);
        return static_cast<double>(d(rng));
    }
};

class Gamma final : public Family {
public:
    std::string_view id() const override { return "gamma"; }
    const std::vector<std::string>& param_names() const override {
        static const std::vector<std::string> names{"mu", "shape"};
        return names;
    }
    Support support() const override { return Support::PositiveReals; }

    void validate(const Theta& t) const override {
        require(finite(t[0]) && t[0] > 0.0, "gamma", "mu must be > 0");
        require(finite(t[1]) && t[1] > 0.0, "gamma", "shape must be > 0");
    }
    static boost::math::gamma_distribution<> dist(const Theta& t) {
        return boost::math::gamma_distribution<>(t[1], t[0] / t[1]);
    }
    double cdf(double y, const Theta& t) const override {
        validate(t);
        if (y <= 0.0) return 0.0;
        return boost::math::cdf(dist(t), y);
    }
    double sf(double y, const Theta& t) const override {
        validate(t);
        if (y <= 0.0) return 1.0;
        return boost::math::cdf(boost::math::complement(dist(t), y));
    }
    double quantile(double p, const Theta& t) const override {
        validate(t);
        check_probability(p);
        return boost::math::quantile(dist(t), p);
    }
    Moments mean_var(const Theta& t) const override {
        validate(t);
        return {t[0], t[0] * t[0] / t[1]};
    }
    double deviance(double y, const Theta& t) const override {
        validate(t);
        require(y > 0.0, "gamma", "y must be > 0");
        return 2.0 * (-std::log(y / t[0]) + (y - t[0]) / t[0]);
    }
    double sample(const Theta& t, Rng& rng) const override {
        validate(t);
        std::gamma_distribution<double> d(t[1], t[0] / t[1]);
        return d(rng);
    }
};

class Shash final : public Family {
public:
    std::string_view id() const override { return "shash"; }
    const std::vector<std::string>& param_names() const override {
        static const std::vector<std::string> names{"mu", "sigma", "eps", "delta"};
        return names;
    }
    Support support() const override { return Support::RealLine; }
    bool exponential_family() const override { return false; }

    void validate(const Theta& t) const override {
        require(finite(t[0]), "shash", "mu must be finite");
        require(finite(t[1]) && t[1] > 0.0, "shash", "sigma must be > 0");
        require(finite(t[2]), "shash", "eps must be finite");
        require(finite(t[3]) && t[3] > 0.0, "shash", "delta must be > 0");
    }
    static double standard_normal_score(double y, const Theta& t) {
        double u = (y - t[0]) / (t[1] * t[3]);
        return std::sinh(t[3] * std::asinh(u) - t[2]);
    }
    double cdf(double y, const Theta& t) const override {
        validate(t);
        return norm_cdf(standard_normal_score(y, t));
    }
    double sf(double y, const Theta& t) const override {
        validate(t);
        return norm_sf(standard_normal_score(y, t));
    }
    static double from_normal(double z, const Theta& t) {
        return t[0] + t[1] * t[3] * std::sinh((std::asinh(z) + t[2]) / t[3]);
    }
    double quantile(double p, const Theta& t) const override {
        validate(t);
        check_probability(p);
        return from_normal(norm_quantile(p), t);
    }
    Moments mean_var(const Theta& t) const override {
        validate(t);
        // Location-scale family: only (eps, delta) need integration. Rows
        // usually share them, so the last result is memoised per thread.
        thread_local double last_eps = std::numeric_limits<double>::quiet_NaN();
        thread_local double last_delta = std::numeric_limits<double>::quiet_NaN();
        thread_local std::pair<double, double> last{};
        if (t[2] != last_eps || t[3] != last_delta) {
            last = shash_raw_moments(t[2], t[3]);
            last_eps = t[2];
            last_delta = t[3];
        }
        double scale = t[1] * t[3];
        return {t[0] + scale * last.first, scale * scale * (last.second - last.first * last.first)};
    }
    double deviance(double, const Theta&) const override {
        throw UnsupportedError("deviance residuals are defined only for exponential families; "
                               "shash has no unit deviance");
    }
    double sample(const Theta& t, Rng& rng) const override {
        validate(t);
        std::normal_distribution<double> z;
        return from_normal(z(rng), t);
    }
};

}  // namespace

std::pair<double, double> shash_raw_moments(double eps, double delta) {
    using boost::math::quadrature::gauss_kronrod;
    auto x = [&](double z) { return std::sinh((std::asinh(z) + eps) / delta); };
    const double inf = std::numeric_limits<double>::infinity();
    double m1 = gauss_kronrod<double, 61>::integrate(
        [&](double z) { return x(z) * norm_pdf(z); }, -inf, inf, 15, 1e-12);
    double m2 = gauss_kronrod<double, 61>::integrate(
        [&](double z) {
            double v = x(z);
            return v * v * norm_pdf(z);
        },
        -inf, inf, 15, 1e-12);
    return {m1, m2};
}

std::unique_ptr<Family> make_gaussian() { return std::make_unique<Gaussian>(); }
std::unique_ptr<Family> make_poisson() { return std::make_unique<Poisson>(); }
std::unique_ptr<Family> make_binomial() { return std::make_unique<Binomial>(); }
std::unique_ptr<Family> make_gamma() { return std::make_unique<Gamma>(); }
std::unique_ptr<Family> make_shash() { return std::make_unique<Shash>(); }

std::unique_ptr<Family> make_family(std::string_view id) {
    if (id == "gaussian") return make_gaussian();
    if (id == "poisson") return make_poisson();
    if (id == "binomial") return make_binomial();
    if (id == "gamma") return make_gamma();
    if (id == "shash") return make_shash();
    throw ConfigError("unknown family '" + std::string(id) + "'", "family");
}

std::vector<std::string> family_ids() { return {"gaussian", "poisson", "binomial", "gamma", "shash"}; }

}  // namespace gamdiag
