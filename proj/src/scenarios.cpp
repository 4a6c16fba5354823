#include "gamdiag/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gamdiag/error.hpp"
#include "gamdiag/parallel.hpp"
#include "gamdiag/rng.hpp"

namespace gamdiag {

namespace {

constexpr std::size_t kBlock = 4096;

struct Entry {
    ScenarioId id;
    const char* name;
};

constexpr Entry kEntries[] = {
    {ScenarioId::WellSpecified, "well_specified"}, {ScenarioId::MeanMiss, "mean_miss"},
    {ScenarioId::VarMiss, "var_miss"},             {ScenarioId::SkewMiss, "skew_miss"},
    {ScenarioId::KurtMiss, "kurt_miss"},           {ScenarioId::SurfaceDemo, "surface_demo"},
};

// well-specified mean, shared by every shash scenario except mean_miss's model
double base_mu(double x) { return 0.4 * x * x - 1.0; }

// intercept-only fit of base_mu under x ~ U(-3.5, 3.5): 0.4 E[x^2] - 1
constexpr double kMeanMissModelMu = 0.4 * kScenarioXMax * kScenarioXMax / 3.0 - 1.0;

double shash_draw(const ShashParams& p, double z) {
    return p.mu + p.sigma * p.delta * std::sinh((std::asinh(z) + p.eps) / p.delta);
}

}  // namespace

std::string_view to_string(ScenarioId id) {
    for (const auto& e : kEntries)
        if (e.id == id) return e.name;
    return "?";
}

ScenarioId parse_scenario_id(std::string_view text) {
    for (const auto& e : kEntries)
        if (text == e.name) return e.id;
    throw ConfigError("unknown scenario '" + std::string(text) + "'", "id");
}

std::vector<std::string> scenario_ids() {
    std::vector<std::string> out;
    for (const auto& e : kEntries) out.emplace_back(e.name);
    return out;
}

ShashParams truth_params(ScenarioId id, double x) {
    ShashParams p;
    p.mu = base_mu(x);
    switch (id) {
        case ScenarioId::VarMiss: p.sigma = std::exp(0.1 * x * x); break;
        case ScenarioId::SkewMiss: p.eps = 0.5 * x; break;
        case ScenarioId::KurtMiss: p.delta = std::exp(0.06 * x * x); break;
        case ScenarioId::SurfaceDemo: throw ConfigError("surface_demo is not a shash scenario", "id");
        default: break;
    }
    return p;
}

ShashParams model_params(ScenarioId id, double x) {
    if (id == ScenarioId::SurfaceDemo) throw ConfigError("surface_demo is not a shash scenario", "id");
    ShashParams p;
    p.mu = id == ScenarioId::MeanMiss ? kMeanMissModelMu : base_mu(x);
    return p;
}

double surface_demo_f(double x, double z) {
    return 2.0 * std::sin(2.0 * std::numbers::pi * x) * std::cos(2.0 * std::numbers::pi * z);
}

Scenario generate(ScenarioId id, std::size_t n, std::uint64_t seed, std::size_t threads) {
    if (n == 0) throw ConfigError("scenario size n must be >= 1", "n");
    const bool surface = id == ScenarioId::SurfaceDemo;
    std::vector<double> y(n), x(n), x2(n);
    std::vector<double> mu(n), sigma(n), eps(n), delta(n);
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    parallel_for(blocks, threads, [&](std::size_t b) {
        auto rng = make_rng(seed, b);
        std::normal_distribution<double> normal;
        const std::size_t first = b * kBlock, last = std::min(n, first + kBlock);
        if (surface) {
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            for (std::size_t i = first; i < last; ++i) {
                x[i] = unit(rng);
                x2[i] = unit(rng);
                mu[i] = surface_demo_f(x[i], x2[i]);
                sigma[i] = kSurfaceDemoSigma;
                y[i] = mu[i] + kSurfaceDemoSigma * normal(rng);
            }
            return;
        }
        std::uniform_real_distribution<double> cov(kScenarioXMin, kScenarioXMax);
        for (std::size_t i = first; i < last; ++i) {
            x[i] = cov(rng);
            x2[i] = cov(rng);
            y[i] = shash_draw(truth_params(id, x[i]), normal(rng));
            auto m = model_params(id, x[i]);
            mu[i] = m.mu;
            sigma[i] = m.sigma;
            eps[i] = m.eps;
            delta[i] = m.delta;
        }
    });

    Scenario sc;
    sc.info.id = id;
    sc.info.n = n;
    sc.info.seed = seed;
    auto& ds = sc.dataset;
    ds.add_column(Column("y", Role::Response, std::move(y)));
    ds.add_column(Column("x", Role::Covariate, std::move(x)));
    if (surface) {
        ds.add_column(Column("z", Role::Covariate, std::move(x2)));
        ds.add_column(Column("mu", Role::Parameter, std::move(mu)));
        ds.add_column(Column("sigma", Role::Parameter, std::move(sigma)));
        sc.info.family = "gaussian";
        sc.info.channel = "none";
        sc.info.truth = "y = 2 sin(2 pi x) cos(2 pi z) + N(0, 4), x, z ~ U(0, 1)";
        sc.info.model = "gaussian(mu = true f, sigma = 2)";
        return sc;
    }
    ds.add_column(Column("x2", Role::Covariate, std::move(x2)));
    ds.add_column(Column("mu", Role::Parameter, std::move(mu)));
    ds.add_column(Column("sigma", Role::Parameter, std::move(sigma)));
    ds.add_column(Column("eps", Role::Parameter, std::move(eps)));
    ds.add_column(Column("delta", Role::Parameter, std::move(delta)));
    sc.info.family = "shash";
    sc.info.model = "shash(mu = 0.4x^2 - 1, sigma = 1, eps = 0, delta = 1)";
    switch (id) {
        case ScenarioId::WellSpecified:
            sc.info.channel = "none";
            sc.info.truth = sc.info.model;
            break;
        case ScenarioId::MeanMiss:
            sc.info.channel = "mu";
            sc.info.truth = sc.info.model;
            sc.info.model = "shash(mu = " + std::to_string(kMeanMissModelMu) +
                            ", sigma = 1, eps = 0, delta = 1)";
            break;
        case ScenarioId::VarMiss:
            sc.info.channel = "sigma";
            sc.info.truth = "shash(mu = 0.4x^2 - 1, sigma = exp(0.1x^2), eps = 0, delta = 1)";
            break;
        case ScenarioId::SkewMiss:
            sc.info.channel = "eps";
            sc.info.truth = "shash(mu = 0.4x^2 - 1, sigma = 1, eps = 0.5x, delta = 1)";
            break;
        case ScenarioId::KurtMiss:
            sc.info.channel = "delta";
            sc.info.truth = "shash(mu = 0.4x^2 - 1, sigma = 1, eps = 0, delta = exp(0.06x^2))";
            break;
        default: break;
    }
    return sc;
}

Scenario generate(std::string_view id, std::size_t n, std::uint64_t seed, std::size_t threads) {
    return generate(parse_scenario_id(id), n, seed, threads);
}

}  // namespace gamdiag
