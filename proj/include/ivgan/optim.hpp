#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ivgan/tensor.hpp"

namespace ivgan {

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First and second moments, one per parameter tensor, plus the step count.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t t = 0;

  static AdamState zeros_like(std::span<Tensor* const> params);
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// Bias-corrected Adam: p -= lr * m_hat / (sqrt(v_hat) + eps).
// Moments are created on first use if the state is empty.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               const AdamHyper& hyper);

}  // namespace ivgan
