#pragma once

#include <cstddef>
#include <cstdint>

#include "ivgan/tensor.hpp"

namespace ivgan {

// Counter-based random source. Output i of a stream is a pure function of
// (seed, stream key, i), so streams can be re-created at any position
// without carrying state between runs.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0);

  // Independent child stream identified by `key`. Does not advance *this.
  RandomSource substream(std::uint64_t key) const;

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  // Uniform integer on [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);
  // Standard normal via Box-Muller.
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// i.i.d. standard normal entries.
Tensor gaussian(RandomSource& rng, Dims dims);

}  // namespace ivgan
