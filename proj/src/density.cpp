#include "gamdiag/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gamdiag/error.hpp"
#include "gamdiag/kernels/kernels.hpp"
#include "gamdiag/normal.hpp"
#include "gamdiag/qq.hpp"

namespace gamdiag {

Axis::Axis(double lo_, double hi_, std::size_t knots_) : lo(lo_), hi(hi_), knots(knots_) {
    if (knots < 2) throw ConfigError("a grid axis needs at least 2 knots", "knots");
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
        throw ConfigError("grid axis needs finite lo < hi", "range");
}

std::vector<double> Axis::values() const {
    std::vector<double> out(knots);
    for (std::size_t k = 0; k < knots; ++k) out[k] = knot(k);
    out.back() = hi;
    return out;
}

namespace {

struct Split {
    std::size_t k;
    double f;  ///< weight on knot k + 1
};

Split locate(double v, const Axis& axis) {
    double u = (v - axis.lo) / axis.step();
    const double last = static_cast<double>(axis.knots - 1);
    if (u <= 0.0) return {0, 0.0};
    if (u >= last) return {axis.knots - 1, 0.0};
    auto k = static_cast<std::size_t>(u);
    return {k, u - static_cast<double>(k)};
}

void accumulate_2d(Grid2D& grid, std::span<const double> x, std::span<const double> r) {
    const std::size_t gr = grid.r.knots;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(r[i])) continue;
        auto sx = locate(x[i], grid.x);
        auto sr = locate(r[i], grid.r);
        double* base = grid.weights.data() + sx.k * gr + sr.k;
        base[0] += (1.0 - sx.f) * (1.0 - sr.f);
        if (sr.f > 0.0) base[1] += (1.0 - sx.f) * sr.f;
        if (sx.f > 0.0) {
            base[gr] += sx.f * (1.0 - sr.f);
            if (sr.f > 0.0) base[gr + 1] += sx.f * sr.f;
        }
    }
}

double total(std::span<const double> v) { return kernels::active().sum(v.data(), v.size()); }

void convolve_axis(std::vector<double>& values, std::size_t outer, std::size_t inner,
                   bool along_inner, const std::vector<double>& w) {
    const auto& k = kernels::active();
    const std::size_t half = w.size() - 1;
    if (along_inner) {
        std::vector<double> out(inner);
        for (std::size_t o = 0; o < outer; ++o) {
            double* row = values.data() + o * inner;
            k.symmetric_convolve(row, inner, w.data(), half, out.data());
            std::copy(out.begin(), out.end(), row);
        }
    } else {
        std::vector<double> in(outer), out(outer);
        for (std::size_t i = 0; i < inner; ++i) {
            for (std::size_t o = 0; o < outer; ++o) in[o] = values[o * inner + i];
            k.symmetric_convolve(in.data(), outer, w.data(), half, out.data());
            for (std::size_t o = 0; o < outer; ++o) values[o * inner + i] = out[o];
        }
    }
}

void check_bandwidth(double h, const char* name) {
    if (!(std::isfinite(h) && h > 0.0)) throw ConfigError("bandwidth must be > 0", name);
}

double trapezoid_2d(const std::vector<double>& v, const Axis& ax, const Axis& ar) {
    std::vector<double> col(ax.knots);
    for (std::size_t ix = 0; ix < ax.knots; ++ix)
        col[ix] = trapezoid(std::span<const double>(v).subspan(ix * ar.knots, ar.knots), ar.step());
    return trapezoid(col, ax.step());
}

ConditionalDensity conditional_from_grid(const Grid2D& grid, double hx, double hr,
                                         double mask_fraction) {
    ConditionalDensity out;
    out.x = grid.x;
    out.r = grid.r;
    const std::size_t gx = grid.x.knots, gr = grid.r.knots;
    Grid1D marginal{grid.x, std::vector<double>(gx, 0.0)};
    for (std::size_t ix = 0; ix < gx; ++ix)
        marginal.weights[ix] = total(std::span<const double>(grid.weights).subspan(ix * gr, gr));
    auto joint = binned_kde(grid, hx, hr);
    auto px = binned_kde(marginal, hx);
    out.marginal = px.values;
    out.values.assign(gx * gr, 0.0);
    out.mask.assign(gx, 1);
    if (joint.zero_weight) return out;
    const double threshold = mask_fraction * *std::max_element(px.values.begin(), px.values.end());
    for (std::size_t ix = 0; ix < gx; ++ix) {
        double p = px.values[ix];
        if (!(p > 0.0) || p < threshold) continue;
        out.mask[ix] = 0;
        for (std::size_t ir = 0; ir < gr; ++ir)
            out.values[ix * gr + ir] = std::max(0.0, joint.at(ix, ir)) / p;
    }
    return out;
}

std::pair<double, double> finite_range(std::span<const double> v) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double a : v)
        if (std::isfinite(a)) {
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
    return {lo, hi};
}

std::vector<double> finite_values(std::span<const double> v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (double a : v)
        if (std::isfinite(a)) out.push_back(a);
    return out;
}

Axis padded_axis(double lo, double hi, double h, std::size_t knots) {
    if (!(lo <= hi)) throw EmptyDatasetError();
    return Axis(lo - 3.0 * h, hi + 3.0 * h, knots);
}

void fill_delta(DensityField& field, const Distance& distance) {
    const std::size_t gx = field.x.knots, gr = field.r.knots;
    field.delta.assign(gx * gr, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t ix = 0; ix < gx; ++ix) {
        if (field.mask[ix]) continue;
        for (std::size_t ir = 0; ir < gr; ++ir) {
            const std::size_t c = ix * gr + ir;
            double d = distance.fn(field.observed[c], field.model[c]);
            if (!std::isfinite(d))
                throw ConfigError("distance '" + distance.name +
                                      "' returned a non-finite value for finite densities",
                                  "distance");
            field.delta[c] = d;
        }
    }
}

struct Bandwidths {
    double hx;
    double hr;
};

Bandwidths resolve_bandwidths(std::span<const double> r, std::span<const double> x,
                              const DensCheckOptions& opt) {
    Bandwidths b{};
    b.hx = opt.hx ? *opt.hx : select_bandwidth(finite_values(x));
    b.hr = opt.hr ? *opt.hr : select_bandwidth(finite_values(r));
    check_bandwidth(b.hx, "hx");
    check_bandwidth(b.hr, "hr");
    return b;
}

}  // namespace

Grid1D linear_bin_1d(std::span<const double> x, const Axis& axis) {
    Grid1D grid{axis, std::vector<double>(axis.knots, 0.0)};
    for (double v : x) {
        if (!std::isfinite(v)) continue;
        auto s = locate(v, axis);
        grid.weights[s.k] += 1.0 - s.f;
        if (s.f > 0.0) grid.weights[s.k + 1] += s.f;
    }
    return grid;
}

Grid2D linear_bin_2d(std::span<const double> x, std::span<const double> r, const Axis& ax,
                     const Axis& ar) {
    if (x.size() != r.size()) throw ConfigError("x and r differ in length");
    Grid2D grid{ax, ar, std::vector<double>(ax.knots * ar.knots, 0.0)};
    accumulate_2d(grid, x, r);
    return grid;
}

std::vector<double> gaussian_weights(double step, double h, std::size_t knots) {
    auto half = static_cast<std::size_t>(std::floor(4.0 * h / step + 1e-9));
    half = std::min(half, knots - 1);
    std::vector<double> w(half + 1);
    for (std::size_t k = 0; k <= half; ++k) w[k] = norm_pdf(static_cast<double>(k) * step / h);
    return w;
}

double trapezoid(std::span<const double> values, double step) {
    if (values.size() < 2) return 0.0;
    double s = kernels::active().sum(values.data(), values.size());
    return step * (s - 0.5 * (values.front() + values.back()));
}

Density1D binned_kde(const Grid1D& grid, double h) {
    check_bandwidth(h, "h");
    Density1D out{grid.axis, std::vector<double>(grid.axis.knots, 0.0), false};
    if (!(total(grid.weights) > 0.0)) {
        out.zero_weight = true;
        return out;
    }
    auto w = gaussian_weights(grid.axis.step(), h, grid.axis.knots);
    kernels::active().symmetric_convolve(grid.weights.data(), grid.axis.knots, w.data(),
                                         w.size() - 1, out.values.data());
    double area = trapezoid(out.values, grid.axis.step());
    for (auto& v : out.values) v /= area;
    return out;
}

Density2D binned_kde(const Grid2D& grid, double hx, double hr) {
    check_bandwidth(hx, "hx");
    check_bandwidth(hr, "hr");
    Density2D out{grid.x, grid.r, grid.weights, false};
    if (!(total(grid.weights) > 0.0)) {
        out.zero_weight = true;
        std::fill(out.values.begin(), out.values.end(), 0.0);
        return out;
    }
    const std::size_t gx = grid.x.knots, gr = grid.r.knots;
    convolve_axis(out.values, gx, gr, true, gaussian_weights(grid.r.step(), hr, gr));
    convolve_axis(out.values, gx, gr, false, gaussian_weights(grid.x.step(), hx, gx));
    double area = trapezoid_2d(out.values, grid.x, grid.r);
    for (auto& v : out.values) v /= area;
    return out;
}

std::vector<double> direct_kde(std::span<const double> x, const Axis& axis, double h) {
    check_bandwidth(h, "h");
    std::vector<double> out(axis.knots, 0.0);
    std::size_t n = 0;
    for (double v : x) {
        if (!std::isfinite(v)) continue;
        ++n;
        for (std::size_t k = 0; k < axis.knots; ++k) out[k] += norm_pdf((axis.knot(k) - v) / h);
    }
    if (n == 0) return out;
    for (auto& v : out) v /= static_cast<double>(n) * h;
    return out;
}

double select_bandwidth(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) throw DegenerateError("bandwidth selection needs at least 2 points");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0))
        throw DegenerateError("column is constant; pass an explicit bandwidth");
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    double iqr = quantile_type7(sorted, 0.75) - quantile_type7(sorted, 0.25);
    double spread = iqr > 0.0 ? std::min(sd, iqr / 1.349) : sd;
    return 1.06 * spread * std::pow(static_cast<double>(n), -0.2);
}

ConditionalDensity conditional_density(std::span<const double> r, std::span<const double> x,
                                       const Axis& ax, const Axis& ar, double hx, double hr,
                                       double mask_fraction) {
    return conditional_from_grid(linear_bin_2d(x, r, ax, ar), hx, hr, mask_fraction);
}

double cuberoot_distance(double p, double pm) {
    return std::cbrt(std::sqrt(std::max(p, 0.0)) - std::sqrt(std::max(pm, 0.0)));
}

Distance default_distance() { return Distance{"cuberoot", cuberoot_distance}; }

DensityField dens_check(std::span<const double> r, std::span<const double> x, Reference reference,
                        const DensCheckOptions& opt) {
    if (r.size() != x.size()) throw ConfigError("residuals and covariate differ in length");
    if (reference == Reference::SimulationOnly)
        throw ConfigError("this residual type has no analytic reference; use simulated residuals",
                          "l");
    auto bw = resolve_bandwidths(r, x, opt);
    auto [xlo, xhi] = finite_range(x);
    auto [rlo, rhi] = finite_range(r);
    Axis ax = padded_axis(xlo, xhi, bw.hx, opt.gx);
    Axis ar = padded_axis(rlo, rhi, bw.hr, opt.gr);

    auto cond = conditional_density(r, x, ax, ar, bw.hx, bw.hr, opt.mask_fraction);
    DensityField field;
    field.x = ax;
    field.r = ar;
    field.hx = bw.hx;
    field.hr = bw.hr;
    field.distance = opt.distance.name;
    field.reference = std::string(to_string(reference));
    field.observed = std::move(cond.values);
    field.mask = std::move(cond.mask);

    // reference density convolved with the gaussian r-kernel
    std::vector<double> ref(ar.knots);
    const double h = bw.hr;
    for (std::size_t k = 0; k < ar.knots; ++k) {
        double v = ar.knot(k);
        if (reference == Reference::Normal) {
            double s = std::sqrt(1.0 + h * h);
            ref[k] = norm_pdf(v / s) / s;
        } else {
            ref[k] = norm_cdf(v / h) - norm_cdf((v - 1.0) / h);
        }
    }
    field.model.assign(ax.knots * ar.knots, 0.0);
    for (std::size_t ix = 0; ix < ax.knots; ++ix)
        if (!field.mask[ix]) std::copy(ref.begin(), ref.end(), field.model.begin() + ix * ar.knots);
    fill_delta(field, opt.distance);
    return field;
}

DensityField dens_check(std::span<const double> r, std::span<const double> x,
                        const SimulatedResiduals& sims, const DensCheckOptions& opt) {
    if (r.size() != x.size()) throw ConfigError("residuals and covariate differ in length");
    if (sims.n != r.size()) throw ConfigError("simulated residuals have a different n", "l");
    if (sims.replicates == 0) throw ConfigError("no simulated replicates", "l");
    if (sims.rows_sorted)
        throw ConfigError("simulated rows were sorted and no longer pair with the covariate", "l");
    auto bw = resolve_bandwidths(r, x, opt);
    auto [xlo, xhi] = finite_range(x);
    auto [rlo, rhi] = finite_range(r);
    auto [slo, shi] = finite_range(sims.values);
    Axis ax = padded_axis(xlo, xhi, bw.hx, opt.gx);
    Axis ar = padded_axis(std::min(rlo, slo), std::max(rhi, shi), bw.hr, opt.gr);

    auto cond = conditional_density(r, x, ax, ar, bw.hx, bw.hr, opt.mask_fraction);
    Grid2D sim_grid{ax, ar, std::vector<double>(ax.knots * ar.knots, 0.0)};
    for (std::size_t v = 0; v < sims.replicates; ++v) accumulate_2d(sim_grid, x, sims.row(v));
    auto model = conditional_from_grid(sim_grid, bw.hx, bw.hr, opt.mask_fraction);

    DensityField field;
    field.x = ax;
    field.r = ar;
    field.hx = bw.hx;
    field.hr = bw.hr;
    field.distance = opt.distance.name;
    field.reference = "simulation";
    field.observed = std::move(cond.values);
    field.model = std::move(model.values);
    field.mask = std::move(cond.mask);
    // x support is shared, but keep the union of both masks to be safe
    for (std::size_t ix = 0; ix < ax.knots; ++ix) field.mask[ix] |= model.mask[ix];
    fill_delta(field, opt.distance);
    return field;
}

}  // namespace gamdiag
