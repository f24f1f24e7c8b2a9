#pragma once

#include <cstdint>
#include <initializer_list>

namespace datd {

/// Counter-based seed derivation: mixes a run seed with a list of labels
/// (purpose tag, entity id, task id, ...) into an independent stream seed.
/// Streams derived for different label tuples never depend on how many
/// draws other streams consumed.
std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> labels);

/// splitmix64 stream with portable uniform and normal draws. Unlike the
/// standard distributions, the output sequence is identical across standard
/// library implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  /// Uniform on the open interval (0,1).
  double uniform();
  /// Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal(double mean, double stddev);
  bool bernoulli(double p) { return p > 0.0 && uniform() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace datd
