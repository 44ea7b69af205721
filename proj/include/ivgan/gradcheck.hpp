#pragma once

#include <functional>
#include <vector>

#include "ivgan/autodiff.hpp"

namespace ivgan {

// Builds a single-element output from the given input on the given tape.
using ScalarFn = std::function<Var(Tape&, Var)>;

struct GradCheckResult {
  // max over checked coordinates of |analytic - central| / max(1, |analytic|)
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  // Coordinates whose finite-difference stencil touches a relu/leaky_relu/abs
  // kink; these are left out of max_rel_error.
  std::vector<std::size_t> excluded;
};

inline constexpr double kKinkTolerance = 1e-7;

GradCheckResult grad_check(const ScalarFn& f, const Tensor& x, double step = 1e-5);

}  // namespace ivgan
