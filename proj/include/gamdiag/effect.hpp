#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace gamdiag {

struct OpacityParams {
    double delta = 0.05;
    double gamma = 3.0;
    double beta = 0.2;

    /// DomainError unless 0 <= delta < 1, gamma > 0 and 0 < beta <= 1.
    void validate() const;
};

/// Fitted smooth f̂ and its variance v̂ on a rectangular (x1, x2) grid.
/// Matrices are row-major with x1 varying fastest: value(i1, i2) = m[i2 * nx1 + i1].
struct EffectSurface {
    std::vector<double> x1;
    std::vector<double> x2;
    std::vector<double> fhat;
    std::vector<double> vhat;
    OpacityParams params;
    std::optional<std::vector<double>> opacity;
    std::optional<std::vector<double>> perturbed;

    std::size_t cells() const noexcept { return x1.size() * x2.size(); }
    /// SchemaError on mismatched shapes, DomainError on negative or
    /// non-finite variances.
    void validate() const;
};

/// Long-format CSV with columns x1, x2, fhat, vhat covering a complete grid.
EffectSurface load_surface_csv(const std::filesystem::path& path);
EffectSurface parse_surface_csv(std::string_view text);
std::string surface_to_csv(const EffectSurface& surf);

/// max{(1 - z)^gamma, beta} with z = max(0, p - delta).
double t_transform(double p, const OpacityParams& params = {});

/// Two-sided p-value 2{1 - Phi(|f| / sqrt(v))}; v = 0 maps to 1 (f = 0) or 0.
double two_sided_p(double f, double v);

std::vector<double> opacity_field(const EffectSurface& surf);

/// f̂ + N(0, v̂) per cell, deterministic under `seed`.
std::vector<double> perturb_field(const EffectSurface& surf, std::uint64_t seed);

}  // namespace gamdiag
