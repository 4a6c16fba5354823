#include <atomic>
#include <cstdlib>
#include <string_view>

#include "gamdiag/kernels/kernels.hpp"

namespace gamdiag::kernels {

#if defined(GAMDIAG_BUILD_AVX2)
const KernelTable& avx2_kernels();
#endif

std::string_view to_string(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "?";
}

const KernelTable* avx2_table() {
#if defined(GAMDIAG_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
    static const bool supported = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    return supported ? &avx2_kernels() : nullptr;
#else
    return nullptr;
#endif
}

namespace {

const KernelTable* initial_table() {
    if (const char* env = std::getenv("GAMDIAG_SIMD")) {
        if (std::string_view(env) == "scalar") return &scalar_table();
    }
    if (auto* t = avx2_table()) return t;
    return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool set_active(Isa isa) {
    const KernelTable* t = isa == Isa::Scalar ? &scalar_table() : avx2_table();
    if (!t) return false;
    current().store(t, std::memory_order_release);
    return true;
}

}  // namespace gamdiag::kernels
