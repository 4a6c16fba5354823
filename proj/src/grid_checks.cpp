#include "gamdiag/grid_checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "gamdiag/error.hpp"
#include "gamdiag/kernels/kernels.hpp"
#include "gamdiag/normal.hpp"
#include "gamdiag/parallel.hpp"
#include "gamdiag/qq.hpp"

namespace gamdiag {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(std::span<const double> v) {
    return kernels::active().sum(v.data(), v.size()) / static_cast<double>(v.size());
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

void check_lengths(std::size_t n, std::size_t a, std::size_t b = 0, bool has_b = false) {
    if (a != n || (has_b && b != n))
        throw ConfigError("residuals and covariates differ in length");
}

// Members of each group, stored contiguously (counting sort by group id).
struct Groups {
    std::vector<std::size_t> offsets;  // size groups + 1
    std::vector<std::size_t> members;

    std::span<const std::size_t> of(std::size_t g) const {
        return std::span<const std::size_t>(members).subspan(offsets[g], offsets[g + 1] - offsets[g]);
    }
    std::size_t size(std::size_t g) const { return offsets[g + 1] - offsets[g]; }
};

constexpr std::size_t kNoGroup = std::numeric_limits<std::size_t>::max();

Groups make_groups(std::span<const std::size_t> group_of, std::size_t groups) {
    Groups g;
    g.offsets.assign(groups + 1, 0);
    for (auto k : group_of)
        if (k != kNoGroup) ++g.offsets[k + 1];
    for (std::size_t k = 0; k < groups; ++k) g.offsets[k + 1] += g.offsets[k];
    g.members.resize(g.offsets.back());
    std::vector<std::size_t> fill(g.offsets.begin(), g.offsets.end() - 1);
    for (std::size_t i = 0; i < group_of.size(); ++i)
        if (group_of[i] != kNoGroup) g.members[fill[group_of[i]]++] = i;
    return g;
}

// summary of values[members] per group; NaN when below min_count
std::vector<double> summarise(const Groups& groups, std::size_t count,
                              std::span<const double> values, const SummaryFunction& summary) {
    std::vector<double> out(count, kNaN);
    std::vector<double> buf;
    for (std::size_t g = 0; g < count; ++g) {
        auto m = groups.of(g);
        if (m.size() < summary.min_count || m.empty()) continue;
        buf.resize(m.size());
        for (std::size_t j = 0; j < m.size(); ++j) buf[j] = values[m[j]];
        double s = summary.fn(buf);
        out[g] = std::isfinite(s) ? s : kNaN;
    }
    return out;
}

// replicate-by-group summary matrix, row v = replicate v
std::vector<double> replicate_summaries(const Groups& groups, std::size_t count,
                                        const SimulatedResiduals& sims,
                                        const SummaryFunction& summary, std::size_t threads) {
    if (sims.rows_sorted)
        throw ConfigError("simulated rows were sorted and no longer pair with the covariates", "l");
    std::vector<double> out(sims.replicates * count);
    parallel_for(sims.replicates, threads, [&](std::size_t v) {
        auto row = summarise(groups, count, sims.row(v), summary);
        std::copy(row.begin(), row.end(), out.begin() + v * count);
    });
    return out;
}

}  // namespace

double summary_mean(std::span<const double> v) {
    if (v.empty()) return kNaN;
    return mean_of(v);
}

double summary_sd(std::span<const double> v) {
    if (v.size() < 2) return kNaN;
    double m2 = 0.0, m3 = 0.0;
    kernels::active().central_sums(v.data(), v.size(), mean_of(v), &m2, &m3);
    return std::sqrt(m2 / static_cast<double>(v.size() - 1));
}

double summary_skewness(std::span<const double> v) {
    if (v.size() < 3) return kNaN;
    double m2 = 0.0, m3 = 0.0;
    kernels::active().central_sums(v.data(), v.size(), mean_of(v), &m2, &m3);
    const double n = static_cast<double>(v.size());
    m2 /= n;
    m3 /= n;
    if (!(m2 > 0.0)) return kNaN;
    return m3 / std::pow(m2, 1.5);
}

SummaryFunction builtin_summary(std::string_view name) {
    if (name == "mean") return {"mean", 1, summary_mean};
    if (name == "sd") return {"sd", kMinSpreadCount, summary_sd};
    if (name == "skewness") return {"skewness", kMinSpreadCount, summary_skewness};
    throw ConfigError("unknown summary '" + std::string(name) + "' (expected mean|sd|skewness)",
                      "summary");
}

SummarySeries grid_check_1d(std::span<const double> res, std::span<const double> x, std::size_t b,
                            const SummaryFunction& summary, const SimulatedResiduals* sims,
                            double alpha, std::size_t threads) {
    if (b == 0) throw ConfigError("bin count b must be >= 1", "b");
    check_lengths(res.size(), x.size());
    if (sims && sims->n != res.size()) throw ConfigError("simulated residuals have a different n", "l");
    if (sims && !(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]", "alpha");
    auto [lo, hi] = finite_range(x);
    if (!(lo <= hi)) throw EmptyDatasetError();
    const double width = (hi - lo) / static_cast<double>(b);

    std::vector<std::size_t> bin_of(x.size(), kNoGroup);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) continue;
        std::size_t k = 0;
        if (width > 0.0) {
            double u = std::floor((x[i] - lo) / width);
            k = u <= 0.0 ? 0 : std::min(b - 1, static_cast<std::size_t>(u));
        }
        bin_of[i] = k;
    }
    auto groups = make_groups(bin_of, b);

    SummarySeries out;
    out.summary = summary.name;
    out.alpha = alpha;
    out.edges.resize(b + 1);
    for (std::size_t k = 0; k <= b; ++k) out.edges[k] = lo + width * static_cast<double>(k);
    out.edges.back() = hi;
    out.s = summarise(groups, b, res, summary);
    out.centers.resize(b);
    out.counts.resize(b);
    out.flags.resize(b);
    for (std::size_t k = 0; k < b; ++k) {
        auto m = groups.of(k);
        out.counts[k] = m.size();
        if (m.empty()) {
            out.centers[k] = 0.5 * (out.edges[k] + out.edges[k + 1]);
        } else {
            double acc = 0.0;
            for (auto i : m) acc += x[i];
            out.centers[k] = acc / static_cast<double>(m.size());
        }
        out.flags[k] = std::isfinite(out.s[k]) ? 0 : 1;
    }
    out.lo.assign(b, kNaN);
    out.hi.assign(b, kNaN);
    if (!sims) return out;

    out.replicates = sims->replicates;
    auto reps = replicate_summaries(groups, b, *sims, summary, threads);
    std::vector<double> column;
    for (std::size_t k = 0; k < b; ++k) {
        if (out.flags[k]) continue;
        column.clear();
        for (std::size_t v = 0; v < sims->replicates; ++v) {
            double s = reps[v * b + k];
            if (std::isfinite(s)) column.push_back(s);
        }
        if (column.empty()) {
            out.flags[k] = 1;
            continue;
        }
        std::sort(column.begin(), column.end());
        out.lo[k] = quantile_type7(column, (1.0 - alpha) / 2.0);
        out.hi[k] = quantile_type7(column, (1.0 + alpha) / 2.0);
    }
    return out;
}

double fraction_outside(const SummarySeries& series) {
    std::size_t used = 0, outside = 0;
    for (std::size_t k = 0; k < series.bins(); ++k) {
        if (series.flags[k] || !std::isfinite(series.lo[k])) continue;
        ++used;
        if (series.s[k] < series.lo[k] || series.s[k] > series.hi[k]) ++outside;
    }
    return used == 0 ? kNaN : static_cast<double>(outside) / static_cast<double>(used);
}

double HexLattice::row_height() const noexcept { return w * std::sqrt(3.0) / 2.0; }

std::pair<double, double> HexLattice::center(std::int64_t row, std::int64_t col) const {
    double offset = (row % 2 != 0) ? w / 2.0 : 0.0;
    return {static_cast<double>(col) * w + offset, static_cast<double>(row) * row_height()};
}

std::pair<double, double> HexLattice::center_data(std::int64_t row, std::int64_t col) const {
    auto [u, v] = center(row, col);
    return {x1_lo + u * (x1_hi - x1_lo), x2_lo + v * (x2_hi - x2_lo)};
}

std::pair<double, double> HexLattice::standardise(double x1, double x2) const {
    return {(x1 - x1_lo) / (x1_hi - x1_lo), (x2 - x2_lo) / (x2_hi - x2_lo)};
}

HexLattice make_lattice(std::span<const double> x1, std::span<const double> x2, std::size_t hexes) {
    if (hexes == 0) throw ConfigError("hex count must be >= 1", "hexes");
    auto [a_lo, a_hi] = finite_range(x1);
    auto [b_lo, b_hi] = finite_range(x2);
    if (!(a_lo < a_hi) || !(b_lo < b_hi))
        throw DegenerateError("hexagonal binning needs two covariates with non-zero range");
    HexLattice lat;
    lat.w = 1.0 / static_cast<double>(hexes);
    lat.x1_lo = a_lo;
    lat.x1_hi = a_hi;
    lat.x2_lo = b_lo;
    lat.x2_hi = b_hi;
    return lat;
}

HexIndex hex_nearest(double u, double v, double w) {
    const double h = w * std::sqrt(3.0) / 2.0;
    const auto r0 = static_cast<std::int64_t>(std::floor(v / h));
    HexIndex best{};
    double best_d = std::numeric_limits<double>::infinity();
    // candidates visited in lexicographic order, so strict < keeps the smaller on ties
    for (std::int64_t row = r0 - 1; row <= r0 + 2; ++row) {
        double offset = (row % 2 != 0) ? w / 2.0 : 0.0;
        auto c0 = static_cast<std::int64_t>(std::floor((u - offset) / w));
        for (std::int64_t col = c0 - 1; col <= c0 + 2; ++col) {
            double dx = u - (static_cast<double>(col) * w + offset);
            double dy = v - static_cast<double>(row) * h;
            double d = dx * dx + dy * dy;
            if (d < best_d) {
                best_d = d;
                best = {row, col};
            }
        }
    }
    return best;
}

std::vector<HexIndex> hex_assign(std::span<const double> x1, std::span<const double> x2,
                                 const HexLattice& lattice) {
    if (!(lattice.w > 0.0)) throw ConfigError("hex spacing must be > 0", "hexes");
    check_lengths(x1.size(), x2.size());
    std::vector<HexIndex> out(x1.size());
    for (std::size_t i = 0; i < x1.size(); ++i) {
        auto [u, v] = lattice.standardise(x1[i], x2[i]);
        out[i] = hex_nearest(u, v, lattice.w);
    }
    return out;
}

HexSummaryGrid grid_check_2d(std::span<const double> res, std::span<const double> x1,
                             std::span<const double> x2, const HexLattice& lattice,
                             const SummaryFunction& summary, const SimulatedResiduals& sims,
                             std::size_t threads) {
    check_lengths(res.size(), x1.size(), x2.size(), true);
    if (sims.replicates < 2) throw ConfigError("standardisation needs l >= 2", "l");
    if (sims.n != res.size()) throw ConfigError("simulated residuals have a different n", "l");

    std::map<HexIndex, std::size_t> ids;
    std::vector<HexIndex> index_of;
    std::vector<std::size_t> group_of(res.size(), kNoGroup);
    for (std::size_t i = 0; i < res.size(); ++i) {
        if (!std::isfinite(x1[i]) || !std::isfinite(x2[i])) continue;
        auto [u, v] = lattice.standardise(x1[i], x2[i]);
        ids.emplace(hex_nearest(u, v, lattice.w), 0);
    }
    for (auto& [idx, id] : ids) {
        id = index_of.size();
        index_of.push_back(idx);
    }
    for (std::size_t i = 0; i < res.size(); ++i) {
        if (!std::isfinite(x1[i]) || !std::isfinite(x2[i])) continue;
        auto [u, v] = lattice.standardise(x1[i], x2[i]);
        group_of[i] = ids.at(hex_nearest(u, v, lattice.w));
    }
    const std::size_t count = index_of.size();
    auto groups = make_groups(group_of, count);
    auto observed = summarise(groups, count, res, summary);
    auto reps = replicate_summaries(groups, count, sims, summary, threads);

    HexSummaryGrid out;
    out.lattice = lattice;
    out.summary = summary.name;
    out.replicates = sims.replicates;
    out.hexes.resize(count);
    std::vector<double> column;
    for (std::size_t k = 0; k < count; ++k) {
        HexCell& cell = out.hexes[k];
        cell.index = index_of[k];
        std::tie(cell.cx, cell.cy) = lattice.center_data(cell.index.row, cell.index.col);
        cell.count = groups.size(k);
        cell.s = observed[k];
        column.clear();
        for (std::size_t v = 0; v < sims.replicates; ++v) {
            double s = reps[v * count + k];
            if (std::isfinite(s)) column.push_back(s);
        }
        cell.sim_mean = summary_mean(column);
        cell.sim_sd = summary_sd(column);
        // identical replicate summaries leave only rounding noise
        if (cell.sim_sd <= 1e-12 * std::max(1.0, std::abs(cell.sim_mean))) cell.sim_sd = 0.0;
        cell.flag = !std::isfinite(cell.s) || column.size() < 2 || !(cell.sim_sd > 0.0);
        cell.z = cell.flag ? kNaN : (cell.s - cell.sim_mean) / cell.sim_sd;
    }
    return out;
}

std::size_t CellLayout::cell_of(double x1, double x2) const {
    if (!std::isfinite(x1) || !std::isfinite(x2)) return kNoGroup;
    auto pick = [](double v, double lo, double hi, std::size_t n) {
        if (!(hi > lo)) return std::size_t{0};
        double u = std::floor((v - lo) / (hi - lo) * static_cast<double>(n));
        return u <= 0.0 ? std::size_t{0} : std::min(n - 1, static_cast<std::size_t>(u));
    };
    return pick(x2, x2_lo, x2_hi, ny) * nx + pick(x1, x1_lo, x1_hi, nx);
}

CellLayout make_cells(std::span<const double> x1, std::span<const double> x2, std::size_t nx,
                      std::size_t ny) {
    if (nx == 0 || ny == 0) throw ConfigError("glyph grid needs at least one cell per axis", "cells");
    CellLayout c;
    c.nx = nx;
    c.ny = ny;
    std::tie(c.x1_lo, c.x1_hi) = finite_range(x1);
    std::tie(c.x2_lo, c.x2_hi) = finite_range(x2);
    if (!(c.x1_lo <= c.x1_hi) || !(c.x2_lo <= c.x2_hi)) throw EmptyDatasetError();
    return c;
}

namespace {

GlyphGrid glyph_frame(const CellLayout& cells, std::string kind, std::span<const double> x1,
                      std::span<const double> x2, Groups& groups) {
    GlyphGrid grid;
    grid.kind = std::move(kind);
    grid.layout = cells;
    const std::size_t total = cells.nx * cells.ny;
    std::vector<std::size_t> cell_of(x1.size());
    for (std::size_t i = 0; i < x1.size(); ++i) cell_of[i] = cells.cell_of(x1[i], x2[i]);
    groups = make_groups(cell_of, total);
    grid.cells.resize(total);
    const double w1 = (cells.x1_hi - cells.x1_lo) / static_cast<double>(cells.nx);
    const double w2 = (cells.x2_hi - cells.x2_lo) / static_cast<double>(cells.ny);
    for (std::size_t iy = 0; iy < cells.ny; ++iy)
        for (std::size_t ix = 0; ix < cells.nx; ++ix) {
            Glyph& g = grid.cells[iy * cells.nx + ix];
            g.ix = ix;
            g.iy = iy;
            g.x1_lo = cells.x1_lo + w1 * static_cast<double>(ix);
            g.x1_hi = cells.x1_lo + w1 * static_cast<double>(ix + 1);
            g.x2_lo = cells.x2_lo + w2 * static_cast<double>(iy);
            g.x2_hi = cells.x2_lo + w2 * static_cast<double>(iy + 1);
            g.count = groups.size(iy * cells.nx + ix);
        }
    return grid;
}

}  // namespace

GlyphGrid worm_glyphs(std::span<const double> res, std::span<const double> x1,
                      std::span<const double> x2, const CellLayout& cells,
                      const WormOptions& opt) {
    check_lengths(res.size(), x1.size(), x2.size(), true);
    if (opt.max_points < 2) throw ConfigError("worm payload needs at least 2 points", "max_points");
    Groups groups;
    auto grid = glyph_frame(cells, "worm", x1, x2, groups);
    std::vector<double> sorted;
    for (std::size_t c = 0; c < grid.cells.size(); ++c) {
        auto members = groups.of(c);
        const std::size_t m = members.size();
        if (m < std::max<std::size_t>(opt.min_points, 1)) continue;
        sorted.resize(m);
        for (std::size_t j = 0; j < m; ++j) sorted[j] = res[members[j]];
        std::sort(sorted.begin(), sorted.end());
        const std::size_t keep = std::min(m, opt.max_points);
        WormGlyph worm;
        for (std::size_t j = 0; j < keep; ++j) {
            std::size_t i = keep == m ? j
                                      : static_cast<std::size_t>(std::llround(
                                            static_cast<double>(j) * static_cast<double>(m - 1) /
                                            static_cast<double>(keep - 1)));
            double p = plotting_position(i + 1, m);
            double z = norm_quantile(p);
            double d = sorted[i] - z;
            double hw = normal_band_half_width(p, m, opt.alpha);
            worm.theoretical.push_back(z);
            worm.deviation.push_back(d);
            worm.half_width.push_back(hw);
            worm.outside.push_back(std::abs(d) > hw ? 1 : 0);
        }
        grid.cells[c].worm = std::move(worm);
    }
    return grid;
}

GlyphGrid kde_glyphs(std::span<const double> res, std::span<const double> x1,
                     std::span<const double> x2, const CellLayout& cells,
                     const KdeGlyphOptions& opt) {
    check_lengths(res.size(), x1.size(), x2.size(), true);
    Groups groups;
    auto grid = glyph_frame(cells, "kde", x1, x2, groups);
    std::vector<double> finite;
    for (double r : res)
        if (std::isfinite(r)) finite.push_back(r);
    double h = opt.bandwidth ? *opt.bandwidth : select_bandwidth(finite);
    if (!(h > 0.0)) throw ConfigError("bandwidth must be > 0", "bandwidth");
    auto [lo, hi] = finite_range(finite);
    Axis axis(lo - 3.0 * h, hi + 3.0 * h, opt.knots);
    grid.r_axis = axis;
    std::vector<double> members_r;
    for (std::size_t c = 0; c < grid.cells.size(); ++c) {
        auto members = groups.of(c);
        if (members.empty()) continue;
        members_r.resize(members.size());
        for (std::size_t j = 0; j < members.size(); ++j) members_r[j] = res[members[j]];
        auto dens = binned_kde(linear_bin_1d(members_r, axis), h);
        if (dens.zero_weight) continue;
        grid.cells[c].kde = std::move(dens.values);
    }
    return grid;
}

}  // namespace gamdiag
