#pragma once

#include <cstdint>

namespace nclab::rng {

/// SplitMix64 output function: adds the golden-ratio increment, then finalizes.
std::uint64_t mix64(std::uint64_t z);

/// r-th output of a SplitMix64 stream started at `base`; the per-replicate seed rule.
std::uint64_t split_seed(std::uint64_t base, std::uint64_t r);

enum class Stream : std::uint64_t {
  transmission = 0x7472616e736d6974ULL,
  process_noise = 0x6e6f697365000000ULL,
};

/// 64 random bits addressed by (seed, stream, step, index); no hidden state.
std::uint64_t draw_bits(std::uint64_t seed, Stream stream, std::uint64_t step, std::uint64_t index);

/// Uniform in [0, 1) with 53 bits of resolution.
double uniform01(std::uint64_t seed, Stream stream, std::uint64_t step, std::uint64_t index);

/// Standard normal via the inverse CDF applied to a uniform in (0, 1).
double standard_normal(std::uint64_t seed, Stream stream, std::uint64_t step, std::uint64_t index);

}  // namespace nclab::rng
