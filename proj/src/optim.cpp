#include "ivgan/optim.hpp"

#include <cmath>

#include "ivgan/errors.hpp"

namespace ivgan {

AdamState AdamState::zeros_like(std::span<Tensor* const> params) {
  AdamState s;
  for (const Tensor* p : params) {
    s.m.emplace_back(p->dims());
    s.v.emplace_back(p->dims());
  }
  return s;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               const AdamHyper& hyper) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: one gradient per parameter");
  if (state.m.empty() && state.v.empty()) state = AdamState::zeros_like(params);
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adam_step: state does not match the parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_dims(grads[i]) || !params[i]->same_dims(state.m[i]) ||
        !params[i]->same_dims(state.v[i])) {
      throw ShapeError("adam_step: parameter " + std::to_string(i) + " dims " +
                       dims_to_string(params[i]->dims()) + " disagree with its gradient or moments");
    }
  }

  ++state.t;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(hyper.beta1, t);
  const double bc2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->data();
    auto g = grads[i].data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = hyper.beta1 * m[j] + (1.0 - hyper.beta1) * g[j];
      v[j] = hyper.beta2 * v[j] + (1.0 - hyper.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      p[j] -= hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
    }
  }
}

}  // namespace ivgan
