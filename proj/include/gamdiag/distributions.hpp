#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gamdiag/rng.hpp"

namespace gamdiag {

enum class Support { RealLine, Counts, BoundedCounts, PositiveReals };

/// Parameter tuple in the family's declared order (unused slots ignored).
using Theta = std::array<double, 4>;

struct Moments {
    double mean;
    double variance;
};

/// Response distribution supplying F_m, its inverse, moments, unit deviance
/// and a sampler. Implementations are stateless and safe to share across
/// threads; only `sample` touches caller-owned state (the rng).
class Family {
public:
    virtual ~Family() = default;

    virtual std::string_view id() const = 0;
    virtual const std::vector<std::string>& param_names() const = 0;
    virtual Support support() const = 0;
    bool discrete() const { return support() == Support::Counts || support() == Support::BoundedCounts; }
    virtual bool exponential_family() const { return true; }

    /// Throws DomainError when theta is outside the valid domain.
    virtual void validate(const Theta& theta) const = 0;

    /// P(Y <= y).
    virtual double cdf(double y, const Theta& theta) const = 0;
    /// P(Y > y); the default is 1 - cdf, continuous families override it for
    /// upper-tail accuracy.
    virtual double sf(double y, const Theta& theta) const { return 1.0 - cdf(y, theta); }
    /// Continuous: inverse cdf. Discrete: smallest y with cdf(y) >= p.
    /// Requires p in (0, 1).
    virtual double quantile(double p, const Theta& theta) const = 0;
    virtual Moments mean_var(const Theta& theta) const = 0;
    /// Unit deviance d >= 0; UnsupportedError for non-exponential families.
    virtual double deviance(double y, const Theta& theta) const = 0;
    virtual double sample(const Theta& theta, Rng& rng) const = 0;

    std::size_t num_params() const { return param_names().size(); }

protected:
    void check_probability(double p) const;
};

/// gaussian (mu, sigma)
std::unique_ptr<Family> make_gaussian();
/// poisson (mu)
std::unique_ptr<Family> make_poisson();
/// binomial (mu = success probability, size = trials); y counts successes.
std::unique_ptr<Family> make_binomial();
/// gamma (mu = mean, shape)
std::unique_ptr<Family> make_gamma();
/// shash (mu, sigma, eps, delta): sinh-arcsinh with
/// F(y) = Phi(sinh(delta * asinh((y - mu) / (sigma * delta)) - eps)).
std::unique_ptr<Family> make_shash();

/// Lookup by id; throws ConfigError for unknown ids.
std::unique_ptr<Family> make_family(std::string_view id);
std::vector<std::string> family_ids();

/// Standardised shash moments E[X], E[X^2] of X = sinh((asinh Z + eps)/delta),
/// Z ~ N(0,1), by Gauss-Kronrod quadrature.
std::pair<double, double> shash_raw_moments(double eps, double delta);

}  // namespace gamdiag
