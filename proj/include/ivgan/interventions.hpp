#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ivgan/autodiff.hpp"
#include "ivgan/random.hpp"
#include "ivgan/tensor.hpp"

namespace ivgan {

enum class InterventionKind { block_substitution };

// One standard-Gaussian-preserving transformation of d-dimensional latents.
// Block substitution O_i replaces coordinates [i*d/k, (i+1)*d/k) with fresh
// N(0, 1) draws.
class InterventionSpec {
 public:
  InterventionSpec(std::size_t block_index, std::size_t blocks, std::size_t latent_dim,
                   InterventionKind kind = InterventionKind::block_substitution);

  InterventionKind kind() const { return kind_; }
  std::size_t block_index() const { return block_index_; }
  std::size_t blocks() const { return blocks_; }
  std::size_t latent_dim() const { return latent_dim_; }
  std::size_t block_width() const { return latent_dim_ / blocks_; }
  std::size_t block_begin() const { return block_index_ * block_width(); }
  std::size_t block_end() const { return block_begin() + block_width(); }

 private:
  InterventionKind kind_;
  std::size_t block_index_;
  std::size_t blocks_;
  std::size_t latent_dim_;
};

// A complete group: exactly one spec per block index, in index order.
class InterventionGroup {
 public:
  explicit InterventionGroup(std::vector<InterventionSpec> specs);
  static InterventionGroup block_substitution(std::size_t blocks, std::size_t latent_dim);

  std::size_t size() const { return specs_.size(); }
  std::size_t latent_dim() const { return specs_.front().latent_dim(); }
  const InterventionSpec& operator[](std::size_t i) const { return specs_[i]; }
  const std::vector<InterventionSpec>& specs() const { return specs_; }

 private:
  std::vector<InterventionSpec> specs_;
};

// O(z) for an n x d batch; z itself is left untouched.
Tensor apply(const InterventionSpec& spec, const Tensor& z, RandomSource& rng);

struct LabelDraw {
  std::size_t index;
  Tensor one_hot;  // length k
};

Tensor one_hot(std::size_t index, std::size_t k);
LabelDraw sample_label(const InterventionGroup& group, RandomSource& rng);

// Per-row interventions for a minibatch, in the affine form
// out = latent * keep + fill, so gradients still reach the kept coordinates.
struct BatchIntervention {
  std::vector<std::size_t> indices;
  Tensor keep;    // n x d, 1 outside the substituted block, 0 inside
  Tensor fill;    // n x d, fresh N(0,1) inside the block, 0 outside
  Tensor labels;  // n x k one-hot rows
};

// Draws i_j ~ U([k]) independently per row, then the substitution noise.
BatchIntervention draw_batch_intervention(const InterventionGroup& group, std::size_t n,
                                          RandomSource& rng);
Tensor apply(const BatchIntervention& iv, const Tensor& latent);
Var apply(const BatchIntervention& iv, Var latent);

struct InvarianceStats {
  std::vector<double> mean;
  std::vector<double> variance;
  // Largest |cov(c, c')| over c' != c.
  std::vector<double> max_abs_cov;
};

InvarianceStats moment_statistics(const Tensor& samples);
// Moments of O(Z) for n draws of Z ~ N(0, I_d). Requires n >= 1000.
InvarianceStats invariance_statistic(const InterventionSpec& spec, std::size_t n,
                                     RandomSource& rng);
// Moments of O(z) for caller-supplied z.
InvarianceStats invariance_statistic(const InterventionSpec& spec, const Tensor& z,
                                     RandomSource& rng);

// Draws an n x d sample.
using Sampler = std::function<Tensor(RandomSource&, std::size_t)>;

struct GroupInvarianceReport {
  bool invariant = true;
  std::vector<double> statistics;  // energy distance per intervention
  std::vector<double> p_values;
};

inline constexpr double kInvarianceAlpha = 0.01;
inline constexpr std::size_t kInvariancePermutations = 500;

// For each O_i, tests O_i(X) against an independent draw of X with the
// energy-distance permutation test; invariant iff no test rejects at alpha.
GroupInvarianceReport group_invariance_check(const InterventionGroup& group,
                                             const Sampler& sampler, std::size_t n,
                                             RandomSource& rng,
                                             double alpha = kInvarianceAlpha,
                                             std::size_t permutations = kInvariancePermutations);

}  // namespace ivgan
