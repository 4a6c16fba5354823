#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gamdiag/density.hpp"
#include "gamdiag/residuals.hpp"

namespace gamdiag {

/// Scalar summary of the residuals falling in one bin. Bins with fewer than
/// `min_count` members, or a non-finite result, are flagged.
struct SummaryFunction {
    std::string name;
    std::size_t min_count = 1;
    std::function<double(std::span<const double>)> fn;
};

double summary_mean(std::span<const double> v);
/// n - 1 denominator.
double summary_sd(std::span<const double> v);
/// m3 / m2^(3/2) with central moments.
double summary_skewness(std::span<const double> v);

inline constexpr std::size_t kMinSpreadCount = 5;

/// mean | sd | skewness; ConfigError otherwise.
SummaryFunction builtin_summary(std::string_view name);

struct SummarySeries {
    std::string summary;
    std::vector<double> edges;  ///< b + 1 bin edges
    std::vector<double> centers;
    std::vector<double> s;
    std::vector<double> lo;  ///< NaN without simulations
    std::vector<double> hi;
    std::vector<std::size_t> counts;
    std::vector<std::uint8_t> flags;
    double alpha = 0.0;
    std::size_t replicates = 0;

    std::size_t bins() const noexcept { return s.size(); }
};

/// Equal-width bins over [min x, max x]; rows with non-finite x are skipped.
/// With `sims`, every replicate is binned with the same edges and the RI is
/// the type-7 (1-alpha)/2, (1+alpha)/2 quantile of the replicate summaries.
SummarySeries grid_check_1d(std::span<const double> res, std::span<const double> x, std::size_t b,
                            const SummaryFunction& summary, const SimulatedResiduals* sims = nullptr,
                            double alpha = 0.9, std::size_t threads = 0);

/// Share of unflagged bins whose s lies outside [lo, hi]; NaN when none.
double fraction_outside(const SummarySeries& series);

/// Offset hexagon lattice in standardised coordinates: both covariates are
/// mapped to [0, 1]; centers sit at (col * w + (row odd ? w/2 : 0), row * w * sqrt(3)/2).
struct HexLattice {
    double w = 1.0 / 30.0;
    double x1_lo = 0.0, x1_hi = 1.0;
    double x2_lo = 0.0, x2_hi = 1.0;

    double row_height() const noexcept;
    std::pair<double, double> center(std::int64_t row, std::int64_t col) const;
    /// Center mapped back to covariate units.
    std::pair<double, double> center_data(std::int64_t row, std::int64_t col) const;
    std::pair<double, double> standardise(double x1, double x2) const;
};

inline constexpr std::size_t kDefaultHexes = 30;

/// Lattice with `hexes` hexagons across the standardised x1 range.
HexLattice make_lattice(std::span<const double> x1, std::span<const double> x2,
                        std::size_t hexes = kDefaultHexes);

struct HexIndex {
    std::int64_t row = 0;
    std::int64_t col = 0;
    auto operator<=>(const HexIndex&) const = default;
};

/// Nearest center for a point already in standardised coordinates; exact
/// ties go to the lexicographically smaller (row, col).
HexIndex hex_nearest(double u, double v, double w);
std::vector<HexIndex> hex_assign(std::span<const double> x1, std::span<const double> x2,
                                 const HexLattice& lattice);

struct HexCell {
    HexIndex index;
    double cx = 0.0, cy = 0.0;  ///< center in covariate units
    std::size_t count = 0;
    double s = 0.0;
    double sim_mean = 0.0;
    double sim_sd = 0.0;
    double z = 0.0;
    bool flag = false;
};

struct HexSummaryGrid {
    HexLattice lattice;
    std::string summary;
    std::size_t replicates = 0;
    std::vector<HexCell> hexes;  ///< sorted by (row, col)
};

/// z = (s - mean_v s~) / sd_v s~ per hex. ConfigError for l < 2.
HexSummaryGrid grid_check_2d(std::span<const double> res, std::span<const double> x1,
                             std::span<const double> x2, const HexLattice& lattice,
                             const SummaryFunction& summary, const SimulatedResiduals& sims,
                             std::size_t threads = 0);

/// Coarse rectangular cells for glyph grids.
struct CellLayout {
    std::size_t nx = 4, ny = 4;
    double x1_lo = 0.0, x1_hi = 1.0;
    double x2_lo = 0.0, x2_hi = 1.0;

    std::size_t cell_of(double x1, double x2) const;
};

CellLayout make_cells(std::span<const double> x1, std::span<const double> x2, std::size_t nx,
                      std::size_t ny);

struct WormGlyph {
    std::vector<double> theoretical;
    std::vector<double> deviation;
    std::vector<double> half_width;
    std::vector<std::uint8_t> outside;
};

struct Glyph {
    std::size_t ix = 0, iy = 0;
    double x1_lo = 0.0, x1_hi = 0.0, x2_lo = 0.0, x2_hi = 0.0;
    std::size_t count = 0;
    std::optional<WormGlyph> worm;
    std::optional<std::vector<double>> kde;  ///< density on GlyphGrid::r_axis

    bool empty() const noexcept { return !worm && !kde; }
};

struct GlyphGrid {
    std::string kind;  ///< "worm" or "kde"
    CellLayout layout;
    std::optional<Axis> r_axis;
    std::vector<Glyph> cells;  ///< row-major over (iy, ix)
};

struct WormOptions {
    double alpha = 0.95;
    std::size_t min_points = 10;
    /// Longer worms are thinned to this many evenly spaced order statistics.
    std::size_t max_points = 200;
};

GlyphGrid worm_glyphs(std::span<const double> res, std::span<const double> x1,
                      std::span<const double> x2, const CellLayout& cells,
                      const WormOptions& opt = {});

struct KdeGlyphOptions {
    std::size_t knots = 64;
    std::optional<double> bandwidth;
};

GlyphGrid kde_glyphs(std::span<const double> res, std::span<const double> x1,
                     std::span<const double> x2, const CellLayout& cells,
                     const KdeGlyphOptions& opt = {});

}  // namespace gamdiag
