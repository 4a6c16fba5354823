#include "gamdiag/qq.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "gamdiag/error.hpp"
#include "gamdiag/kernels/kernels.hpp"
#include "gamdiag/normal.hpp"
#include "gamdiag/parallel.hpp"

namespace gamdiag {

namespace {

std::atomic<std::uint64_t> g_sort_count{0};

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ConfigError("alpha must lie in (0, 1], got " + std::to_string(alpha), "alpha");
}

void mean_order_statistics(const SimulatedResiduals& sims, std::vector<double>& out) {
    const std::size_t n = sims.n;
    out.assign(n, 0.0);
    std::vector<double> buffer;
    for (std::size_t v = 0; v < sims.replicates; ++v) {
        auto row = sims.row(v);
        std::span<const double> sorted = row;
        if (!sims.rows_sorted) {
            buffer.assign(row.begin(), row.end());
            std::sort(buffer.begin(), buffer.end());
            sorted = buffer;
        }
        for (std::size_t i = 0; i < n; ++i) out[i] += sorted[i];
    }
    const double inv = 1.0 / static_cast<double>(sims.replicates);
    for (auto& v : out) v *= inv;
}

}  // namespace

std::uint64_t qq_sort_count() { return g_sort_count.load(); }

double plotting_position(std::size_t i, std::size_t n) {
    return (static_cast<double>(i) - 0.5) / static_cast<double>(n);
}

QQCurve compute_qq_sorted(std::vector<double> sorted_observed, Reference reference,
                          const SimulatedResiduals* sims, bool prefer_simulation) {
    QQCurve curve;
    const std::size_t n = sorted_observed.size();
    curve.observed = std::move(sorted_observed);
    bool use_sims = reference == Reference::SimulationOnly || (prefer_simulation && sims);
    if (use_sims) {
        if (!sims || sims->replicates < 2)
            throw ConfigError("simulation reference needs simulated residuals with l >= 2", "l");
        if (sims->n != n) throw ConfigError("simulated residuals have a different n", "l");
        curve.source = QQSource::Simulation;
        mean_order_statistics(*sims, curve.theoretical);
        return curve;
    }
    curve.source = QQSource::Analytic;
    curve.theoretical.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double p = plotting_position(i + 1, n);
        curve.theoretical[i] = reference == Reference::Normal ? norm_quantile(p) : p;
    }
    return curve;
}

QQCurve compute_qq(const ResidualVector& res, const SimulatedResiduals* sims,
                   bool prefer_simulation) {
    if (res.reference == Reference::SimulationOnly && (!sims || sims->replicates < 2))
        throw ConfigError(std::string(to_string(res.type)) +
                              " residuals have no analytic reference; simulated residuals with "
                              "l >= 2 are required",
                          "l");
    return compute_qq_sorted(sorted_values(res), res.reference, sims, prefer_simulation);
}

std::vector<double> sorted_values(const ResidualVector& res) {
    std::vector<double> sorted = res.values;
    std::sort(sorted.begin(), sorted.end());
    g_sort_count.fetch_add(1);
    return sorted;
}

double arc_length(std::span<const double> observed, std::span<const double> theoretical) {
    const std::size_t n = observed.size();
    if (n < 2) throw DegenerateError("arc length needs at least 2 points");
    std::vector<double> seg(n - 1);
    kernels::active().segment_lengths(observed.data(), theoretical.data(), n, seg.data());
    return kernels::active().sum(seg.data(), seg.size());
}

double arc_length(const QQCurve& curve) { return arc_length(curve.observed, curve.theoretical); }

BinnedQQ bin_qq(const QQCurve& curve, std::size_t b0, std::span<const Band> bands,
                const Band* envelope, std::size_t begin, std::size_t end) {
    if (b0 == 0) throw ConfigError("bin budget b0 must be >= 1", "b0");
    end = std::min(end, curve.size());
    begin = std::min(begin, end);
    const std::size_t m = end - begin;
    for (const auto& band : bands)
        if (band.lower.size() != curve.size() || band.upper.size() != curve.size())
            throw ConfigError("band '" + band.name + "' is not aligned with the curve");
    if (envelope && (envelope->lower.size() != curve.size() || envelope->upper.size() != curve.size()))
        throw ConfigError("envelope is not aligned with the curve");

    BinnedQQ out;
    out.b0 = b0;
    out.points = m;
    out.source = curve.source;
    for (const auto& band : bands) out.bands.push_back(Band{band.name, {}, {}});
    if (envelope) out.envelope = Band{envelope->name, {}, {}};
    if (m == 0) return out;

    // bin index per point, non-decreasing along the curve
    std::vector<std::size_t> bin(m, 0);
    if (m <= b0) {
        for (std::size_t i = 0; i < m; ++i) bin[i] = i;
    } else {
        std::vector<double> seg(m - 1);
        kernels::active().segment_lengths(curve.observed.data() + begin,
                                          curve.theoretical.data() + begin, m, seg.data());
        std::vector<double> cum(m, 0.0);
        for (std::size_t i = 1; i < m; ++i) cum[i] = cum[i - 1] + seg[i - 1];
        const double total = cum.back();
        if (total > 0.0) {
            const double scale = static_cast<double>(b0) / total;
            for (std::size_t i = 0; i < m; ++i) {
                // boundary ties go to the lower bin
                double pos = std::ceil(cum[i] * scale) - 1.0;
                auto k = pos <= 0.0 ? std::size_t{0} : static_cast<std::size_t>(pos);
                bin[i] = std::min(k, b0 - 1);
            }
        }
    }

    auto average = [&](std::span<const double> values, std::vector<double>& dst) {
        std::size_t i = 0;
        while (i < m) {
            std::size_t j = i;
            double acc = 0.0;
            while (j < m && bin[j] == bin[i]) acc += values[begin + j++];
            dst.push_back(acc / static_cast<double>(j - i));
            i = j;
        }
    };
    {
        std::size_t i = 0;
        while (i < m) {
            std::size_t j = i;
            while (j < m && bin[j] == bin[i]) ++j;
            out.counts.push_back(j - i);
            i = j;
        }
    }
    average(curve.observed, out.s);
    average(curve.theoretical, out.sbar);
    for (std::size_t b = 0; b < bands.size(); ++b) {
        average(bands[b].lower, out.bands[b].lower);
        average(bands[b].upper, out.bands[b].upper);
    }
    if (envelope) {
        average(envelope->lower, out.envelope->lower);
        average(envelope->upper, out.envelope->upper);
    }
    return out;
}

double ks_half_width(std::size_t n, double alpha) {
    check_alpha(alpha);
    if (n == 0) throw ConfigError("n must be >= 1", "n");
    double tail = 1.0 - alpha;
    double c = std::sqrt(-std::log(tail / 2.0) / 2.0);
    return c / std::sqrt(static_cast<double>(n));
}

Band ks_band(std::span<const double> theoretical, double alpha) {
    double d = ks_half_width(theoretical.size(), alpha);
    Band band{"ks", {}, {}};
    band.lower.reserve(theoretical.size());
    band.upper.reserve(theoretical.size());
    for (double t : theoretical) {
        band.lower.push_back(std::max(0.0, t - d));
        band.upper.push_back(std::min(1.0, t + d));
    }
    return band;
}

double normal_band_half_width(double p, std::size_t n, double alpha) {
    check_alpha(alpha);
    if (!(p > 0.0 && p < 1.0)) throw DomainError("band probability must lie in (0, 1)", "p");
    double crit = norm_quantile((1.0 + alpha) / 2.0);
    double z = norm_quantile(p);
    return crit / norm_pdf(z) * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

std::vector<double> normal_band_half_widths(std::span<const double> probs, std::size_t n,
                                            double alpha) {
    std::vector<double> out;
    out.reserve(probs.size());
    for (double p : probs) out.push_back(normal_band_half_width(p, n, alpha));
    return out;
}

Band normal_band(std::span<const double> theoretical, double alpha) {
    const std::size_t n = theoretical.size();
    Band band{"normal", std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        double hw = normal_band_half_width(plotting_position(i + 1, n), n, alpha);
        band.lower[i] = theoretical[i] - hw;
        band.upper[i] = theoretical[i] + hw;
    }
    return band;
}

double quantile_type7(std::span<const double> sorted, double prob) {
    if (sorted.empty()) throw DegenerateError("quantile of an empty sample");
    double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

Band sim_envelope(SimulatedResiduals& sims, double alpha, std::size_t threads) {
    check_alpha(alpha);
    if (sims.replicates < 2) throw ConfigError("simulation envelope needs l >= 2", "l");
    sort_rows(sims, threads);
    return sim_envelope_sorted(sims, alpha, threads);
}

Band sim_envelope_sorted(const SimulatedResiduals& sims, double alpha, std::size_t threads) {
    check_alpha(alpha);
    if (sims.replicates < 2) throw ConfigError("simulation envelope needs l >= 2", "l");
    if (!sims.rows_sorted) throw ConfigError("replicate rows must be sorted first", "l");
    const std::size_t n = sims.n, l = sims.replicates;
    Band env{"envelope", std::vector<double>(n), std::vector<double>(n)};
    const double plo = (1.0 - alpha) / 2.0, phi = (1.0 + alpha) / 2.0;
    constexpr std::size_t kChunk = 4096;
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    parallel_for(chunks, threads, [&](std::size_t c) {
        std::vector<double> column(l);
        const std::size_t first = c * kChunk, last = std::min(n, first + kChunk);
        for (std::size_t i = first; i < last; ++i) {
            for (std::size_t v = 0; v < l; ++v) column[v] = sims.values[v * n + i];
            std::sort(column.begin(), column.end());
            env.lower[i] = quantile_type7(column, plo);
            env.upper[i] = quantile_type7(column, phi);
        }
    });
    return env;
}

std::pair<std::size_t, std::size_t> theoretical_window(const QQCurve& curve, double lo, double hi) {
    const auto& t = curve.theoretical;
    auto first = std::lower_bound(t.begin(), t.end(), lo);
    auto last = std::upper_bound(first, t.end(), hi);
    return {static_cast<std::size_t>(first - t.begin()), static_cast<std::size_t>(last - t.begin())};
}

QQPlot::QQPlot(QQCurve curve, std::vector<Band> bands, std::optional<Band> envelope,
               std::size_t clip_count)
    : curve_(std::move(curve)),
      bands_(std::move(bands)),
      envelope_(std::move(envelope)),
      clip_count_(clip_count) {
    const std::size_t n = curve_.size();
    for (const auto& b : bands_)
        if (b.lower.size() != n || b.upper.size() != n)
            throw ConfigError("band '" + b.name + "' is not aligned with the curve");
    if (envelope_ && (envelope_->lower.size() != n || envelope_->upper.size() != n))
        throw ConfigError("envelope is not aligned with the curve");
}

BinnedQQ QQPlot::binned(std::size_t b0) const {
    auto out = bin_qq(curve_, b0, bands_, envelope_ ? &*envelope_ : nullptr);
    out.clip_count = clip_count_;
    return out;
}

BinnedQQ QQPlot::zoom(double lo, double hi, std::size_t b0) const {
    if (!(lo < hi)) throw ConfigError("zoom range needs lo < hi", "lo");
    auto [first, last] = theoretical_window(curve_, lo, hi);
    auto out = bin_qq(curve_, b0, bands_, envelope_ ? &*envelope_ : nullptr, first, last);
    out.clip_count = clip_count_;
    return out;
}

}  // namespace gamdiag
