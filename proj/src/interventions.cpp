#include "ivgan/interventions.hpp"

#include <algorithm>
#include <cmath>

#include "ivgan/errors.hpp"
#include "ivgan/ops.hpp"
#include "ivgan/stats.hpp"

namespace ivgan {

InterventionSpec::InterventionSpec(std::size_t block_index, std::size_t blocks,
                                   std::size_t latent_dim, InterventionKind kind)
    : kind_(kind), block_index_(block_index), blocks_(blocks), latent_dim_(latent_dim) {
  if (blocks == 0 || latent_dim == 0 || latent_dim % blocks != 0) {
    throw ContractError("block count k=" + std::to_string(blocks) +
                        " must divide latent dim d=" + std::to_string(latent_dim));
  }
  if (block_index >= blocks) {
    throw ContractError("block index " + std::to_string(block_index) + " not in [0, " +
                        std::to_string(blocks) + ")");
  }
}

InterventionGroup::InterventionGroup(std::vector<InterventionSpec> specs)
    : specs_(std::move(specs)) {
  if (specs_.empty()) throw ContractError("intervention group is empty");
  const std::size_t k = specs_.front().blocks();
  const std::size_t d = specs_.front().latent_dim();
  if (specs_.size() != k) throw ContractError("group size must equal the block count");
  std::vector<bool> seen(k, false);
  for (const auto& s : specs_) {
    if (s.blocks() != k || s.latent_dim() != d) {
      throw ContractError("group members disagree on k or d");
    }
    if (seen[s.block_index()]) throw ContractError("block index covered twice");
    seen[s.block_index()] = true;
  }
  std::sort(specs_.begin(), specs_.end(), [](const auto& a, const auto& b) {
    return a.block_index() < b.block_index();
  });
}

InterventionGroup InterventionGroup::block_substitution(std::size_t blocks,
                                                        std::size_t latent_dim) {
  std::vector<InterventionSpec> specs;
  for (std::size_t i = 0; i < blocks; ++i) specs.emplace_back(i, blocks, latent_dim);
  return InterventionGroup(std::move(specs));
}

Tensor apply(const InterventionSpec& spec, const Tensor& z, RandomSource& rng) {
  if (z.rank() != 2 || z.dim(1) != spec.latent_dim()) {
    throw ShapeError("intervention expects n x " + std::to_string(spec.latent_dim()) +
                     " latents, got " + dims_to_string(z.dims()));
  }
  Tensor out = z;
  for (std::size_t r = 0; r < z.dim(0); ++r)
    for (std::size_t c = spec.block_begin(); c < spec.block_end(); ++c) out(r, c) = rng.normal();
  return out;
}

Tensor one_hot(std::size_t index, std::size_t k) {
  if (index >= k) throw ContractError("one-hot index out of range");
  Tensor t({k});
  t[index] = 1.0;
  return t;
}

LabelDraw sample_label(const InterventionGroup& group, RandomSource& rng) {
  const std::size_t i = rng.uniform_index(group.size());
  return LabelDraw{i, one_hot(i, group.size())};
}

BatchIntervention draw_batch_intervention(const InterventionGroup& group, std::size_t n,
                                          RandomSource& rng) {
  const std::size_t d = group.latent_dim(), k = group.size();
  BatchIntervention iv{std::vector<std::size_t>(n), Tensor({n, d}, 1.0), Tensor({n, d}),
                       Tensor({n, k})};
  for (std::size_t r = 0; r < n; ++r) iv.indices[r] = rng.uniform_index(k);
  for (std::size_t r = 0; r < n; ++r) {
    const InterventionSpec& spec = group[iv.indices[r]];
    iv.labels(r, iv.indices[r]) = 1.0;
    for (std::size_t c = spec.block_begin(); c < spec.block_end(); ++c) {
      iv.keep(r, c) = 0.0;
      iv.fill(r, c) = rng.normal();
    }
  }
  return iv;
}

Tensor apply(const BatchIntervention& iv, const Tensor& latent) {
  if (!latent.same_dims(iv.keep)) throw ShapeError("batch intervention dims mismatch");
  Tensor out = latent;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] * iv.keep[i] + iv.fill[i];
  return out;
}

Var apply(const BatchIntervention& iv, Var latent) {
  Tape& tape = latent.tape();
  return add(mul(latent, tape.constant(iv.keep)), tape.constant(iv.fill));
}

InvarianceStats moment_statistics(const Tensor& samples) {
  if (samples.rank() != 2 || samples.dim(0) < 2) {
    throw ContractError("moment statistics need an n x d matrix with n >= 2");
  }
  const std::size_t n = samples.dim(0), d = samples.dim(1);
  InvarianceStats s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0),
                    std::vector<double>(d, 0.0)};
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) s.mean[c] += samples(r, c);
  for (double& m : s.mean) m /= static_cast<double>(n);

  std::vector<double> cov(d * d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t a = 0; a < d; ++a) {
      const double da = samples(r, a) - s.mean[a];
      for (std::size_t b = a; b < d; ++b) cov[a * d + b] += da * (samples(r, b) - s.mean[b]);
    }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t a = 0; a < d; ++a) {
    s.variance[a] = cov[a * d + a] / denom;
    for (std::size_t b = a + 1; b < d; ++b) {
      const double c = std::abs(cov[a * d + b] / denom);
      s.max_abs_cov[a] = std::max(s.max_abs_cov[a], c);
      s.max_abs_cov[b] = std::max(s.max_abs_cov[b], c);
    }
  }
  return s;
}

InvarianceStats invariance_statistic(const InterventionSpec& spec, std::size_t n,
                                     RandomSource& rng) {
  if (n < 1000) throw ContractError("invariance_statistic needs n >= 1000");
  const Tensor z = gaussian(rng, {n, spec.latent_dim()});
  return moment_statistics(apply(spec, z, rng));
}

InvarianceStats invariance_statistic(const InterventionSpec& spec, const Tensor& z,
                                     RandomSource& rng) {
  return moment_statistics(apply(spec, z, rng));
}

GroupInvarianceReport group_invariance_check(const InterventionGroup& group,
                                             const Sampler& sampler, std::size_t n,
                                             RandomSource& rng, double alpha,
                                             std::size_t permutations) {
  GroupInvarianceReport report;
  for (const auto& spec : group.specs()) {
    const Tensor x = sampler(rng, n);
    const Tensor reference = sampler(rng, n);
    if (x.rank() != 2 || x.dim(1) != group.latent_dim()) {
      throw ShapeError("sampler must emit n x d matrices");
    }
    const TwoSampleTest t = energy_test(apply(spec, x, rng), reference, permutations, rng);
    report.statistics.push_back(t.statistic);
    report.p_values.push_back(t.p_value);
    if (t.p_value < alpha) report.invariant = false;
  }
  return report;
}

}  // namespace ivgan
