#pragma once

#include <optional>

#include "ivgan/autodiff.hpp"
#include "ivgan/tensor.hpp"

namespace ivgan {

// Differentiable primitives. Binary elementwise ops require equal dims.

Var matmul(Var a, Var b);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var neg(Var x);
Var abs(Var x);
Var relu(Var x);
Var leaky_relu(Var x, double slope);
Var tanh(Var x);
Var sigmoid(Var x);
// log(sigmoid(x)), stable for large |x|.
Var log_sigmoid(Var x);
// Throws DomainError on non-positive entries.
Var log(Var x);
Var exp(Var x);
Var square(Var x);

Var scale(Var x, double factor);
Var add_scalar(Var x, double offset);
// max(x, floor); gradient passes only where x > floor.
Var clamp_min(Var x, double floor);

// x[n x c] + bias[c] (or [1 x c]) broadcast over rows.
Var add_row(Var x, Var bias);

// Full reduction to a single-element tensor, or reduction along `axis`
// which removes that axis.
Var sum(Var x, std::optional<std::size_t> axis = std::nullopt);
Var mean(Var x, std::optional<std::size_t> axis = std::nullopt);

// Row-wise softmax of an n x k matrix, stabilized by subtracting the row max.
Var softmax_rows(Var x);

// Plain (non-recording) kernels shared with the rest of the library.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor softmax_rows(const Tensor& x);

}  // namespace ivgan
