#include "gamdiag/effect.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <random>

#include "gamdiag/dataset.hpp"
#include "gamdiag/error.hpp"
#include "gamdiag/normal.hpp"
#include "gamdiag/rng.hpp"

namespace gamdiag {

void OpacityParams::validate() const {
    if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("opacity delta must lie in [0, 1)", "delta");
    if (!(gamma > 0.0 && std::isfinite(gamma))) throw DomainError("opacity gamma must be > 0", "gamma");
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("opacity beta must lie in (0, 1]", "beta");
}

void EffectSurface::validate() const {
    if (x1.empty() || x2.empty()) throw SchemaError("effect surface has an empty axis");
    if (fhat.size() != cells() || vhat.size() != cells())
        throw SchemaError("fhat/vhat do not match the x1 x x2 grid");
    for (double v : vhat)
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("vhat must be finite and >= 0", "vhat");
    for (double f : fhat)
        if (!std::isfinite(f)) throw DomainError("fhat must be finite", "fhat");
}

namespace {

std::vector<double> sorted_unique(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::size_t position(const std::vector<double>& axis, double v) {
    return static_cast<std::size_t>(std::lower_bound(axis.begin(), axis.end(), v) - axis.begin());
}

EffectSurface from_dataset(const Dataset& ds) {
    auto x1 = ds.numeric("x1");
    auto x2 = ds.numeric("x2");
    auto f = ds.numeric("fhat");
    auto v = ds.numeric("vhat");
    EffectSurface surf;
    surf.x1 = sorted_unique(x1);
    surf.x2 = sorted_unique(x2);
    if (surf.cells() != ds.rows())
        throw SchemaError("surface rows do not form a complete rectangular grid (" +
                          std::to_string(ds.rows()) + " rows for " +
                          std::to_string(surf.x1.size()) + " x " + std::to_string(surf.x2.size()) +
                          " cells)");
    surf.fhat.assign(surf.cells(), 0.0);
    surf.vhat.assign(surf.cells(), 0.0);
    std::vector<std::uint8_t> seen(surf.cells(), 0);
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        std::size_t c = position(surf.x2, x2[i]) * surf.x1.size() + position(surf.x1, x1[i]);
        if (seen[c]) throw SchemaError("duplicate surface cell at row " + std::to_string(i + 1));
        seen[c] = 1;
        surf.fhat[c] = f[i];
        surf.vhat[c] = v[i];
    }
    surf.validate();
    return surf;
}

Schema surface_schema() {
    return Schema{{"x1", Role::Parameter, DType::Float64},
                  {"x2", Role::Parameter, DType::Float64},
                  {"fhat", Role::Parameter, DType::Float64},
                  {"vhat", Role::Parameter, DType::Float64}};
}

void append_number(std::string& out, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, end);
}

}  // namespace

EffectSurface load_surface_csv(const std::filesystem::path& path) {
    return from_dataset(load_csv(path, surface_schema()));
}

EffectSurface parse_surface_csv(std::string_view text) {
    return from_dataset(parse_csv(text, surface_schema()));
}

std::string surface_to_csv(const EffectSurface& surf) {
    surf.validate();
    std::string out = "x1,x2,fhat,vhat\n";
    for (std::size_t i2 = 0; i2 < surf.x2.size(); ++i2)
        for (std::size_t i1 = 0; i1 < surf.x1.size(); ++i1) {
            std::size_t c = i2 * surf.x1.size() + i1;
            append_number(out, surf.x1[i1]);
            out += ',';
            append_number(out, surf.x2[i2]);
            out += ',';
            append_number(out, surf.fhat[c]);
            out += ',';
            append_number(out, surf.vhat[c]);
            out += '\n';
        }
    return out;
}

double t_transform(double p, const OpacityParams& params) {
    params.validate();
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p-value must lie in [0, 1]", "p");
    double z = std::max(0.0, p - params.delta);
    return std::max(std::pow(1.0 - z, params.gamma), params.beta);
}

double two_sided_p(double f, double v) {
    if (v < 0.0) throw DomainError("variance must be >= 0", "vhat");
    if (v == 0.0) return f == 0.0 ? 1.0 : 0.0;
    return 2.0 * norm_sf(std::abs(f) / std::sqrt(v));
}

std::vector<double> opacity_field(const EffectSurface& surf) {
    surf.validate();
    surf.params.validate();
    std::vector<double> out(surf.cells());
    for (std::size_t c = 0; c < out.size(); ++c)
        out[c] = t_transform(two_sided_p(surf.fhat[c], surf.vhat[c]), surf.params);
    return out;
}

std::vector<double> perturb_field(const EffectSurface& surf, std::uint64_t seed) {
    surf.validate();
    auto rng = make_rng(seed, 0);
    std::normal_distribution<double> z;
    std::vector<double> out(surf.cells());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = surf.fhat[c] + std::sqrt(surf.vhat[c]) * z(rng);
    return out;
}

}  // namespace gamdiag
