#include "gamdiag/residuals.hpp"

#include <algorithm>
#include <cmath>

#include "gamdiag/error.hpp"
#include "gamdiag/kernels/kernels.hpp"
#include "gamdiag/normal.hpp"
#include "gamdiag/parallel.hpp"

namespace gamdiag {

std::string_view to_string(ResidualType type) {
    switch (type) {
        case ResidualType::Uniform: return "uniform";
        case ResidualType::Quantile: return "quantile";
        case ResidualType::Pearson: return "pearson";
        case ResidualType::Deviance: return "deviance";
    }
    return "?";
}

std::string_view to_string(Reference ref) {
    switch (ref) {
        case Reference::Uniform: return "uniform";
        case Reference::Normal: return "normal";
        case Reference::SimulationOnly: return "simulation";
    }
    return "?";
}

ResidualType parse_residual_type(std::string_view text) {
    if (text == "uniform") return ResidualType::Uniform;
    if (text == "quantile") return ResidualType::Quantile;
    if (text == "pearson") return ResidualType::Pearson;
    if (text == "deviance") return ResidualType::Deviance;
    throw ConfigError("unknown residual type '" + std::string(text) +
                          "' (expected uniform|quantile|pearson|deviance)",
                      "type");
}

Reference reference_of(ResidualType type) {
    switch (type) {
        case ResidualType::Uniform: return Reference::Uniform;
        case ResidualType::Quantile: return Reference::Normal;
        default: return Reference::SimulationOnly;
    }
}

ModelColumns::ModelColumns(const Dataset& ds, const Family& family,
                           const std::map<std::string, std::string>& param_map)
    : family_(&family), rows_(ds.rows()) {
    for (const auto& name : family.param_names()) {
        auto it = param_map.find(name);
        const std::string& col = it == param_map.end() ? name : it->second;
        if (!ds.has(col))
            throw SchemaError("family " + std::string(family.id()) + " needs parameter column '" +
                                  col + "'",
                              col);
        params_.push_back(ds.numeric(col));
    }
}

ModelColumns::ModelColumns(const Family& family, std::vector<std::span<const double>> params)
    : family_(&family), params_(std::move(params)) {
    if (params_.size() != family.num_params())
        throw SchemaError("family " + std::string(family.id()) + " expects " +
                          std::to_string(family.num_params()) + " parameter columns");
    rows_ = params_.empty() ? 0 : params_[0].size();
    for (const auto& p : params_)
        if (p.size() != rows_) throw SchemaError("parameter columns differ in length");
}

namespace {

void check_supported(const Family& family, ResidualType type) {
    if (type == ResidualType::Deviance && !family.exponential_family())
        throw UnsupportedError("deviance residuals are not available for family '" +
                               std::string(family.id()) + "'");
}

std::size_t transform_into(std::span<const double> y, const ModelColumns& model,
                           ResidualType type, std::span<double> out) {
    const Family& family = model.family();
    const std::size_t n = y.size();
    std::size_t clipped = 0;
    switch (type) {
        case ResidualType::Uniform:
            for (std::size_t i = 0; i < n; ++i) out[i] = family.cdf(y[i], model.theta(i));
            break;
        case ResidualType::Quantile:
            for (std::size_t i = 0; i < n; ++i) {
                auto theta = model.theta(i);
                double f = family.cdf(y[i], theta);
                if (f <= 0.5) {
                    if (f < kQuantileClip) {
                        f = kQuantileClip;
                        ++clipped;
                    }
                    out[i] = norm_quantile(f);
                } else {
                    double s = family.sf(y[i], theta);
                    if (s < kQuantileClip) {
                        s = kQuantileClip;
                        ++clipped;
                    }
                    out[i] = -norm_quantile(s);
                }
            }
            break;
        case ResidualType::Pearson: {
            std::vector<double> mu(n), var(n);
            for (std::size_t i = 0; i < n; ++i) {
                auto m = family.mean_var(model.theta(i));
                mu[i] = m.mean;
                var[i] = m.variance;
            }
            kernels::active().pearson(y.data(), mu.data(), var.data(), n, out.data());
            break;
        }
        case ResidualType::Deviance:
            for (std::size_t i = 0; i < n; ++i) {
                auto theta = model.theta(i);
                double mu = family.mean_var(theta).mean;
                double d = family.deviance(y[i], theta);
                double r = std::sqrt(std::max(d, 0.0));
                out[i] = y[i] > mu ? r : (y[i] < mu ? -r : 0.0);
            }
            break;
    }
    return clipped;
}

}  // namespace

ResidualVector transform(std::span<const double> y, const ModelColumns& model, ResidualType type) {
    check_supported(model.family(), type);
    if (y.size() != model.rows()) throw SchemaError("response and parameter columns differ in length");
    ResidualVector res;
    res.type = type;
    res.reference = reference_of(type);
    res.values.resize(y.size());
    res.clip_count = transform_into(y, model, type, res.values);
    if (model.family().discrete() &&
        (type == ResidualType::Uniform || type == ResidualType::Quantile)) {
        res.warnings.push_back(
            "discrete response: non-randomised uniform/quantile residuals are hard to interpret "
            "when y takes few distinct values; prefer simulation-based bands");
    }
    if (res.clip_count > 0) {
        res.warnings.push_back(std::to_string(res.clip_count) +
                               " residual(s) clipped at F_m = 1e-12 or 1 - 1e-12");
    }
    return res;
}

ResidualVector transform(const Dataset& ds, const Family& family, ResidualType type,
                         const std::map<std::string, std::string>& param_map) {
    ModelColumns model(ds, family, param_map);
    return transform(ds.response().float64(), model, type);
}

SimulatedResiduals simulate_residuals(const ModelColumns& model, ResidualType type,
                                      std::size_t replicates, std::uint64_t seed,
                                      std::size_t threads) {
    if (replicates == 0) throw ConfigError("replicate count l must be >= 1", "l");
    check_supported(model.family(), type);
    const std::size_t n = model.rows();
    SimulatedResiduals sims;
    sims.replicates = replicates;
    sims.n = n;
    sims.type = type;
    sims.seed = seed;
    sims.values.resize(replicates * n);
    parallel_for(replicates, threads, [&](std::size_t v) {
        auto rng = make_rng(seed, v);
        std::vector<double> ystar(n);
        for (std::size_t i = 0; i < n; ++i) ystar[i] = model.family().sample(model.theta(i), rng);
        transform_into(ystar, model, type, sims.row(v));
    });
    return sims;
}

SimulatedResiduals simulate_residuals(const Dataset& ds, const Family& family, ResidualType type,
                                      std::size_t replicates, std::uint64_t seed,
                                      std::size_t threads,
                                      const std::map<std::string, std::string>& param_map) {
    ModelColumns model(ds, family, param_map);
    return simulate_residuals(model, type, replicates, seed, threads);
}

void sort_rows(SimulatedResiduals& sims, std::size_t threads) {
    if (sims.rows_sorted) return;
    parallel_for(sims.replicates, threads, [&](std::size_t v) {
        auto row = sims.row(v);
        std::sort(row.begin(), row.end());
    });
    sims.rows_sorted = true;
}

}  // namespace gamdiag
