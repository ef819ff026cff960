#pragma once

// Seeded random streams. Every replicate, permutation and chunk draws from
// its own generator derived from (seed, stream index), which keeps results
// independent of scheduling. The samplers below avoid the standard
// distribution classes so draws are identical across standard libraries.

#include <cstddef>
#include <cstdint>
#include <random>

namespace kmax {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

/// Uniform on [0, 1) with 53 random bits.
double uniform01(Rng& rng);
/// Uniform integer in [0, bound), bound >= 1, without modulo bias.
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);
/// N(0, 1) via the Marsaglia polar method.
double standard_normal(Rng& rng);
/// Exponential with mean 1.
double standard_exponential(Rng& rng);

}  // namespace kmax
