#include "ivgan/random.hpp"

#include <cmath>
#include <numbers>

#include "ivgan/errors.hpp"

namespace ivgan {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_key(std::uint64_t parent, std::uint64_t stream) {
  return mix64(parent ^ mix64(stream + kGamma));
}

}  // namespace

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), key_(derive_key(mix64(seed), stream)) {}

RandomSource RandomSource::substream(std::uint64_t key) const {
  RandomSource child = *this;
  child.key_ = derive_key(key_, key);
  child.counter_ = 0;
  child.has_spare_ = false;
  return child;
}

std::uint64_t RandomSource::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double RandomSource::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::size_t RandomSource::uniform_index(std::size_t n) {
  if (n == 0) throw ContractError("uniform_index over an empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Reject the top partial bucket to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

double RandomSource::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Tensor gaussian(RandomSource& rng, Dims dims) {
  Tensor t(std::move(dims));
  for (double& v : t.data()) v = rng.normal();
  return t;
}

}  // namespace ivgan
