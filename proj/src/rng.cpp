#include "datd/rng.hpp"

#include <cmath>
#include <numbers>

namespace datd {

namespace {

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> labels) {
  std::uint64_t h = mix(seed + kGolden);
  for (std::uint64_t label : labels) h = mix(h ^ mix(label + kGolden));
  return h;
}

std::uint64_t RngStream::next_u64() {
  state_ += kGolden;
  return mix(state_);
}

double RngStream::uniform() {
  // 53 random bits, centred in their bucket so 0 is never returned.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
}

double RngStream::normal(double mean, double stddev) {
  // Box-Muller; the second variate is discarded so each call consumes a
  // fixed number of draws.
  const double u1 = uniform();
  const double u2 = uniform();
  const double z = std::sqrt(-2.0 * std::log(u1)) *
                   std::cos(2.0 * std::numbers::pi * u2);
  return mean + stddev * z;
}

}  // namespace datd
