// Compiled with -mavx2 -mfma. Uses raw pointers and intrinsics only, so no
// inline library templates get instantiated with AVX2 code in this unit.
#include <immintrin.h>

#include <cstddef>

#include "gamdiag/kernels/kernels.hpp"

namespace gamdiag::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

void segment_lengths(const double* a, const double* b, std::size_t n, double* out) {
    if (n < 2) return;
    const std::size_t m = n - 1;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(a + i + 1), _mm256_loadu_pd(a + i));
        __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(b + i + 1), _mm256_loadu_pd(b + i));
        __m256d sq = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
        _mm256_storeu_pd(out + i, _mm256_sqrt_pd(sq));
    }
    for (; i < m; ++i) {
        double dx = a[i + 1] - a[i];
        double dy = b[i + 1] - b[i];
        out[i] = __builtin_sqrt(dx * dx + dy * dy);
    }
}

void symmetric_convolve(const double* in, std::size_t n, const double* w, std::size_t half,
                        double* out) {
    // Interior points see the full stencil; edges fall back to the guarded loop.
    auto edge = [&](std::size_t i) {
        double acc = w[0] * in[i];
        for (std::size_t k = 1; k <= half; ++k) {
            if (i >= k) acc += w[k] * in[i - k];
            if (i + k < n) acc += w[k] * in[i + k];
        }
        out[i] = acc;
    };
    if (n <= 2 * half) {
        for (std::size_t i = 0; i < n; ++i) edge(i);
        return;
    }
    for (std::size_t i = 0; i < half; ++i) edge(i);
    const std::size_t end = n - half;
    std::size_t i = half;
    for (; i + 4 <= end; i += 4) {
        __m256d acc = _mm256_mul_pd(_mm256_set1_pd(w[0]), _mm256_loadu_pd(in + i));
        for (std::size_t k = 1; k <= half; ++k) {
            __m256d pair = _mm256_add_pd(_mm256_loadu_pd(in + i - k), _mm256_loadu_pd(in + i + k));
            acc = _mm256_fmadd_pd(_mm256_set1_pd(w[k]), pair, acc);
        }
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < end; ++i) {
        double acc = w[0] * in[i];
        for (std::size_t k = 1; k <= half; ++k) acc += w[k] * (in[i - k] + in[i + k]);
        out[i] = acc;
    }
    for (i = end; i < n; ++i) edge(i);
}

double sum(const double* x, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
        a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
    }
    double acc = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) acc += x[i];
    return acc;
}

void central_sums(const double* x, std::size_t n, double c, double* m2, double* m3) {
    __m256d vc = _mm256_set1_pd(c);
    __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vc);
        __m256d d2 = _mm256_mul_pd(d, d);
        s2 = _mm256_add_pd(s2, d2);
        s3 = _mm256_fmadd_pd(d2, d, s3);
    }
    double r2 = hsum(s2), r3 = hsum(s3);
    for (; i < n; ++i) {
        double d = x[i] - c;
        r2 += d * d;
        r3 += d * d * d;
    }
    *m2 = r2;
    *m3 = r3;
}

void pearson(const double* y, const double* mu, const double* var, std::size_t n, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d num = _mm256_sub_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(mu + i));
        _mm256_storeu_pd(out + i, _mm256_div_pd(num, _mm256_sqrt_pd(_mm256_loadu_pd(var + i))));
    }
    for (; i < n; ++i) out[i] = (y[i] - mu[i]) / __builtin_sqrt(var[i]);
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        m = _mm256_max_pd(m, _mm256_andnot_pd(sign, d));
    }
    double r = hmax(m);
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        d = d < 0 ? -d : d;
        r = d > r ? d : r;
    }
    return r;
}

}  // namespace

const KernelTable& avx2_kernels() {
    static const KernelTable table{Isa::Avx2,    segment_lengths, symmetric_convolve, sum,
                                   central_sums, pearson,         max_abs_diff};
    return table;
}

}  // namespace gamdiag::kernels
