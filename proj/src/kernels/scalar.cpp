#include <algorithm>
#include <cmath>

#include "gamdiag/kernels/kernels.hpp"

namespace gamdiag::kernels {
namespace {

void segment_lengths(const double* a, const double* b, std::size_t n, double* out) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double dx = a[i + 1] - a[i];
        double dy = b[i + 1] - b[i];
        out[i] = std::sqrt(dx * dx + dy * dy);
    }
}

void symmetric_convolve(const double* in, std::size_t n, const double* w, std::size_t half,
                        double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        double acc = w[0] * in[i];
        for (std::size_t k = 1; k <= half; ++k) {
            if (i >= k) acc += w[k] * in[i - k];
            if (i + k < n) acc += w[k] * in[i + k];
        }
        out[i] = acc;
    }
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void central_sums(const double* x, std::size_t n, double c, double* m2, double* m3) {
    double s2 = 0.0, s3 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = x[i] - c;
        double d2 = d * d;
        s2 += d2;
        s3 += d2 * d;
    }
    *m2 = s2;
    *m3 = s3;
}

void pearson(const double* y, const double* mu, const double* var, std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = (y[i] - mu[i]) / std::sqrt(var[i]);
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{Isa::Scalar,  segment_lengths, symmetric_convolve, sum,
                                   central_sums, pearson,         max_abs_diff};
    return table;
}

}  // namespace gamdiag::kernels
