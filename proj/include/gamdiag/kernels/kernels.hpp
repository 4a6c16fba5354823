#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops. Each kernel has a scalar reference version and,
// on x86-64, an AVX2+FMA version; the active table is picked once at startup
// from CPUID and can be pinned with GAMDIAG_SIMD=scalar|avx2.
namespace gamdiag::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

struct KernelTable {
    Isa isa;

    /// out[i] = hypot(a[i+1] - a[i], b[i+1] - b[i]) for i in [0, n-1).
    void (*segment_lengths)(const double* a, const double* b, std::size_t n, double* out);

    /// out[i] = sum_{k=-half}^{half} w[|k|] * in[i+k], zero outside [0, n).
    void (*symmetric_convolve)(const double* in, std::size_t n, const double* w, std::size_t half,
                               double* out);

    double (*sum)(const double* x, std::size_t n);

    /// m2 = sum (x - c)^2, m3 = sum (x - c)^3.
    void (*central_sums)(const double* x, std::size_t n, double c, double* m2, double* m3);

    /// out[i] = (y[i] - mu[i]) / sqrt(var[i]).
    void (*pearson)(const double* y, const double* mu, const double* var, std::size_t n,
                    double* out);

    /// max_i |a[i] - b[i]| (0 for n == 0).
    double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_table();
/// nullptr when the AVX2 variant was not built or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

const KernelTable& active();
/// Pins the active table; returns false (and changes nothing) when the ISA
/// is unavailable. Intended for tests and benchmarks.
bool set_active(Isa isa);

}  // namespace gamdiag::kernels
