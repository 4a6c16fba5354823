#pragma once

#include <cstdint>
#include <random>

namespace gamdiag {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of sub-stream `stream` under `seed`; independent of scheduling, so
/// replicate v always draws the same numbers whatever the worker count.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    return Rng(stream_seed(seed, stream));
}

}  // namespace gamdiag
