#pragma once

#include <cstdint>
#include <random>

namespace bid {

// splitmix64 finalizer over (seed, stream). Used both for stream derivation
// and for spawning per-asset chain seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Seeded random stream. The same (seed, stream) pair reproduces the exact
// same sample sequence; distinct streams never share generator state.
//
// Variate transforms (uniform, normal, gamma) are implemented here instead
// of through std::*_distribution, whose output sequences are
// implementation-defined and would break cross-platform reproducibility.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  // Uniform integer on [0, bound), bound >= 1.
  std::uint64_t next_below(std::uint64_t bound);
  // Uniform on [0, 1).
  double next_uniform();
  // Uniform on (0, 1); safe to feed into log().
  double next_open_uniform();
  // Standard normal via the Marsaglia polar method; the paired variate is
  // cached and returned on the next call.
  double next_normal();
  // Gamma(shape, scale = 1), shape > 0. Marsaglia-Tsang squeeze, with the
  // power-of-uniform boost for shape < 1.
  double next_gamma(double shape);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

private:
  std::mt19937_64 gen_;
  std::uint64_t seed_;
  std::uint64_t stream_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bid
