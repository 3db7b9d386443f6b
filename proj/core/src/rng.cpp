#include "nclab/rng.hpp"

#include <cmath>

#include <boost/math/special_functions/erf.hpp>

namespace nclab::rng {

namespace {
constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
constexpr double two_pow_m53 = 1.0 / 9007199254740992.0;
}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z += golden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t split_seed(std::uint64_t base, std::uint64_t r) { return mix64(base + r * golden); }

std::uint64_t draw_bits(std::uint64_t seed, Stream stream, std::uint64_t step, std::uint64_t index) {
  return mix64(mix64(mix64(seed ^ static_cast<std::uint64_t>(stream)) + step) + index);
}

double uniform01(std::uint64_t seed, Stream stream, std::uint64_t step, std::uint64_t index) {
  return static_cast<double>(draw_bits(seed, stream, step, index) >> 11) * two_pow_m53;
}

double standard_normal(std::uint64_t seed, Stream stream, std::uint64_t step, std::uint64_t index) {
  const double u = (static_cast<double>(draw_bits(seed, stream, step, index) >> 11) + 0.5) * two_pow_m53;
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

}  // namespace nclab::rng
