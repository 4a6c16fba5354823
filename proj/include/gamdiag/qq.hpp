#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gamdiag/residuals.hpp"

namespace gamdiag {

enum class QQSource { Analytic, Simulation };

/// Sorted observed residuals against model-based theoretical quantiles.
struct QQCurve {
    std::vector<double> observed;
    std::vector<double> theoretical;
    QQSource source = QQSource::Analytic;

    std::size_t size() const noexcept { return observed.size(); }
};

/// Pointwise (lower, upper) vectors aligned with the curve points.
struct Band {
    std::string name;
    std::vector<double> lower;
    std::vector<double> upper;
};

struct BinnedQQ {
    std::vector<double> s;     ///< binned observed means
    std::vector<double> sbar;  ///< binned theoretical means
    std::vector<std::size_t> counts;
    std::vector<Band> bands;     ///< each band averaged within the same bins
    std::optional<Band> envelope;
    std::size_t b0 = 0;
    std::size_t points = 0;  ///< points in the binned window
    QQSource source = QQSource::Analytic;
    std::size_t clip_count = 0;

    std::size_t bins() const noexcept { return s.size(); }
    bool empty() const noexcept { return s.empty(); }
};

inline constexpr std::size_t kDefaultBinBudget = 1000;

/// Number of times an observed residual vector has been sorted by
/// compute_qq / sorted_values in this process.
std::uint64_t qq_sort_count();

/// Ascending copy of the residuals; counted by qq_sort_count().
std::vector<double> sorted_values(const ResidualVector& res);

/// Plotting position (i - 0.5) / n for 1-based i.
double plotting_position(std::size_t i, std::size_t n);

/// Builds the QQ curve. Analytic references use plotting positions through
/// Phi^{-1} (quantile) or the identity (uniform); simulation-only residuals,
/// or any residuals when `sims` is given and `prefer_simulation` is set, use
/// the mean of each order statistic across replicate rows.
QQCurve compute_qq(const ResidualVector& res, const SimulatedResiduals* sims = nullptr,
                   bool prefer_simulation = false);
/// Same as compute_qq, but reuses an already sorted observed vector.
QQCurve compute_qq_sorted(std::vector<double> sorted_observed, Reference reference,
                          const SimulatedResiduals* sims = nullptr, bool prefer_simulation = false);

/// Total arc length of the curve; DegenerateError for fewer than 2 points.
double arc_length(std::span<const double> observed, std::span<const double> theoretical);
double arc_length(const QQCurve& curve);

/// Equal-arc-length binning of points [begin, end) into at most b0 bins.
/// Windows with <= b0 points are returned unbinned (one point per bin).
BinnedQQ bin_qq(const QQCurve& curve, std::size_t b0, std::span<const Band> bands = {},
                const Band* envelope = nullptr, std::size_t begin = 0,
                std::size_t end = std::numeric_limits<std::size_t>::max());

/// Asymptotic Kolmogorov-Smirnov half-width c(alpha)/sqrt(n),
/// c = sqrt(-ln((1 - alpha)/2) / 2).
double ks_half_width(std::size_t n, double alpha);
/// theoretical +- D clipped to [0, 1].
Band ks_band(std::span<const double> theoretical, double alpha);

/// Normal-quantile half-widths z_{(1+alpha)/2} / phi(z_p) * sqrt(p(1-p)/n).
std::vector<double> normal_band_half_widths(std::span<const double> probs, std::size_t n,
                                            double alpha);
double normal_band_half_width(double p, std::size_t n, double alpha);
/// theoretical_i +- half_width(p_i) with plotting positions p_i.
Band normal_band(std::span<const double> theoretical, double alpha);

/// Empirical type-7 quantiles (1-alpha)/2 and (1+alpha)/2 of each order
/// statistic across replicates. Rows are sorted in place if needed.
Band sim_envelope(SimulatedResiduals& sims, double alpha, std::size_t threads = 0);
/// Same, for rows that are already sorted.
Band sim_envelope_sorted(const SimulatedResiduals& sims, double alpha, std::size_t threads = 0);

/// Type-7 quantile of an ascending sequence.
double quantile_type7(std::span<const double> sorted, double prob);

/// Index window [first, last) of points whose theoretical value lies in
/// [lo, hi]; the curve's theoretical vector must be ascending.
std::pair<std::size_t, std::size_t> theoretical_window(const QQCurve& curve, double lo, double hi);

/// Cached QQ curve with its bands: sorted once, then binned or zoomed on
/// demand without another O(n log n) pass.
class QQPlot {
public:
    QQPlot(QQCurve curve, std::vector<Band> bands, std::optional<Band> envelope,
           std::size_t clip_count = 0);

    const QQCurve& curve() const noexcept { return curve_; }
    const std::vector<Band>& bands() const noexcept { return bands_; }
    const std::optional<Band>& envelope() const noexcept { return envelope_; }

    BinnedQQ binned(std::size_t b0) const;
    /// Re-bins only the points with theoretical value in [lo, hi]. An empty
    /// window yields an empty BinnedQQ. ConfigError unless lo < hi.
    BinnedQQ zoom(double lo, double hi, std::size_t b0) const;

private:
    QQCurve curve_;
    std::vector<Band> bands_;
    std::optional<Band> envelope_;
    std::size_t clip_count_;
};

}  // namespace gamdiag
