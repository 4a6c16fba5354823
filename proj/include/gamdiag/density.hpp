#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gamdiag/residuals.hpp"

namespace gamdiag {

/// Equally spaced knots lo, lo + step, ..., hi.
struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t knots = 2;

    Axis() = default;
    Axis(double lo_, double hi_, std::size_t knots_);

    double step() const noexcept { return (hi - lo) / static_cast<double>(knots - 1); }
    double knot(std::size_t k) const noexcept { return lo + step() * static_cast<double>(k); }
    std::vector<double> values() const;
};

struct Grid1D {
    Axis axis;
    std::vector<double> weights;
};

/// Weights are x-major: weights[ix * r.knots + ir].
struct Grid2D {
    Axis x;
    Axis r;
    std::vector<double> weights;

    double& at(std::size_t ix, std::size_t ir) { return weights[ix * r.knots + ir]; }
    double at(std::size_t ix, std::size_t ir) const { return weights[ix * r.knots + ir]; }
};

/// Out-of-range points are clamped to the end knots; non-finite points are
/// skipped. Mass is conserved for every finite point.
Grid1D linear_bin_1d(std::span<const double> x, const Axis& axis);
Grid2D linear_bin_2d(std::span<const double> x, std::span<const double> r, const Axis& ax,
                     const Axis& ar);

struct Density1D {
    Axis axis;
    std::vector<double> values;
    bool zero_weight = false;
};

struct Density2D {
    Axis x;
    Axis r;
    std::vector<double> values;  ///< x-major like Grid2D
    bool zero_weight = false;

    double at(std::size_t ix, std::size_t ir) const { return values[ix * r.knots + ir]; }
};

/// Sampled gaussian weights w[k] = phi(k * step / h), k = 0..half, with the
/// kernel truncated at 4 bandwidths (and at the grid length).
std::vector<double> gaussian_weights(double step, double h, std::size_t knots);

/// Binned gaussian KDE normalised to unit trapezoid integral over the grid.
Density1D binned_kde(const Grid1D& grid, double h);
Density2D binned_kde(const Grid2D& grid, double hx, double hr);

/// Unbinned O(n * g) reference estimator evaluated at the axis knots.
std::vector<double> direct_kde(std::span<const double> x, const Axis& axis, double h);

/// Trapezoid-rule integral of knot values.
double trapezoid(std::span<const double> values, double step);

/// Normal-reference bandwidth 1.06 * min(sd, IQR/1.349) * n^(-1/5).
/// DegenerateError for n < 2 or a constant sample.
double select_bandwidth(std::span<const double> x);

inline constexpr double kSupportMaskFraction = 0.01;
inline constexpr std::size_t kDefaultDensityKnots = 128;

struct ConditionalDensity {
    Axis x;
    Axis r;
    std::vector<double> values;       ///< p(r | x), x-major; 0 in masked columns
    std::vector<double> marginal;     ///< p(x) on the x knots
    std::vector<std::uint8_t> mask;   ///< 1 where p(x) < threshold
};

/// p(r | x) = p(r, x) / p(x) with both estimated by binned KDE on the same
/// knots. Columns with p(x) below `mask_fraction` * max p(x) are masked.
ConditionalDensity conditional_density(std::span<const double> r, std::span<const double> x,
                                       const Axis& ax, const Axis& ar, double hx, double hr,
                                       double mask_fraction = kSupportMaskFraction);

/// Pluggable distance between empirical and model densities.
struct Distance {
    std::string name;
    std::function<double(double p, double pm)> fn;
};

/// sign(a) |a|^(1/3) with a = sqrt(p) - sqrt(pm).
double cuberoot_distance(double p, double pm);
Distance default_distance();

struct DensCheckOptions {
    std::size_t gx = kDefaultDensityKnots;
    std::size_t gr = kDefaultDensityKnots;
    std::optional<double> hx;
    std::optional<double> hr;
    double mask_fraction = kSupportMaskFraction;
    Distance distance = default_distance();
};

struct DensityField {
    Axis x;
    Axis r;
    std::vector<double> delta;     ///< x-major; NaN in masked columns
    std::vector<double> observed;  ///< p̂(r | x)
    std::vector<double> model;     ///< p̂_m(r | x)
    std::vector<std::uint8_t> mask;  ///< per x column
    double hx = 0.0;
    double hr = 0.0;
    std::string distance;
    std::string reference;  ///< "normal", "uniform" or "simulation"

    double at(std::size_t ix, std::size_t ir) const { return delta[ix * r.knots + ir]; }
};

/// densCheck against the analytic reference of the residual type, smoothed
/// with the same r-kernel as the empirical estimate.
DensityField dens_check(std::span<const double> r, std::span<const double> x, Reference reference,
                        const DensCheckOptions& opt = {});
/// densCheck against simulated residuals (each replicate paired with x).
DensityField dens_check(std::span<const double> r, std::span<const double> x,
                        const SimulatedResiduals& sims, const DensCheckOptions& opt = {});

}  // namespace gamdiag
