#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace oracle {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

double normal_quantile(double p) {
    double lo = -40.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (normal_cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> direct_kde(std::span<const double> data, std::span<const double> at, double h) {
    std::vector<double> out(at.size(), 0.0);
    for (std::size_t k = 0; k < at.size(); ++k) {
        double acc = 0.0;
        for (double x : data) acc += normal_pdf((at[k] - x) / h);
        out[k] = acc / (static_cast<double>(data.size()) * h);
    }
    return out;
}

std::pair<std::int64_t, std::int64_t> brute_force_hex(double u, double v, double w) {
    const double h = w * std::sqrt(3.0) / 2.0;
    auto r0 = static_cast<std::int64_t>(std::llround(v / h));
    auto c0 = static_cast<std::int64_t>(std::llround(u / w));
    std::pair<std::int64_t, std::int64_t> best{0, 0};
    double best_d = std::numeric_limits<double>::infinity();
    for (std::int64_t r = r0 - 6; r <= r0 + 6; ++r)
        for (std::int64_t c = c0 - 6; c <= c0 + 6; ++c) {
            double cx = static_cast<double>(c) * w + (std::abs(r) % 2 == 1 ? w / 2.0 : 0.0);
            double cy = static_cast<double>(r) * h;
            double d = (u - cx) * (u - cx) + (v - cy) * (v - cy);
            if (d < best_d) {
                best_d = d;
                best = {r, c};
            }
        }
    return best;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_pvalue(double d, std::size_t n) {
    double sn = std::sqrt(static_cast<double>(n));
    double lambda = (sn + 0.12 + 0.11 / sn) * d;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

double mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd(std::span<const double> v) {
    double m = mean(v), ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double correlation(std::span<const double> a, std::span<const double> b) {
    double ma = mean(a), mb = mean(b), sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

double quantile7(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    double h = (static_cast<double>(v.size()) - 1.0) * p;
    auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

std::size_t local_maxima(std::span<const double> v, double floor) {
    std::size_t count = 0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
        if (v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] > floor) ++count;
    return count;
}

double trapezoid(std::span<const double> v, double step) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) s += 0.5 * (v[i] + v[i + 1]) * step;
    return s;
}

}  // namespace oracle
