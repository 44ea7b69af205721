#pragma once

// Textbook alternating GAN trainer (one D step, one G step) used as the
// reference for the ablation identity. It shares only primitives with the
// library trainer: tensors, ops, networks, Adam and the random stream layout.

#include <vector>

#include "ivgan/benchmarks.hpp"
#include "ivgan/losses.hpp"
#include "ivgan/networks.hpp"
#include "ivgan/ops.hpp"
#include "ivgan/optim.hpp"
#include "ivgan/trainer.hpp"

namespace plain_gan {

using namespace ivgan;

struct State {
  Mlp generator, trunk, d_head;
  AdamState d_adam, g_adam;
};

inline std::vector<Tensor*> d_params(State& s) {
  std::vector<Tensor*> out;
  for (Tensor& p : s.trunk.params()) out.push_back(&p);
  for (Tensor& p : s.d_head.params()) out.push_back(&p);
  return out;
}

inline State from_models(const GanModels& m) {
  State s{m.generator, m.trunk, m.d_head, {}, {}};
  s.d_adam = AdamState::zeros_like(d_params(s));
  std::vector<Tensor*> g;
  for (Tensor& p : s.generator.params()) g.push_back(&p);
  s.g_adam = AdamState::zeros_like(g);
  return s;
}

inline Var score(const BoundMlp& trunk, const BoundMlp& head, Var x) {
  return forward(head, forward(trunk, x));
}

// One iteration `iter` (1-based) on the library's stream layout.
inline void step(State& s, const SyntheticDataset& data, const TrainConfig& c, std::uint64_t iter) {
  const RandomSource pass = step_stream(c.seed, iter).substream(0);
  RandomSource data_rng = pass.substream(streams::kData);
  RandomSource prior = pass.substream(streams::kPrior);
  RandomSource noise = pass.substream(streams::kNoise);
  const double sigma = anneal_noise(iter, c.total_iters, c.noise_sigma0, c.noise_decay_frac);
  const std::size_t n = c.batch_size;
  Tensor x = sample_dataset(data, n, data_rng);
  const Tensor z = gaussian(prior, {n, c.latent_dim});
  Tensor nr = gaussian(noise, {n, 2});
  Tensor nf = gaussian(noise, {n, 2});
  for (double& v : nr.data()) v *= sigma;
  for (double& v : nf.data()) v *= sigma;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += nr[i];
  const AdamHyper h{c.lr_df, c.adam_beta1, c.adam_beta2, c.adam_eps};

  {
    Tensor fake = forward(s.generator, z);
    for (std::size_t i = 0; i < fake.size(); ++i) fake[i] += nf[i];
    Tape tape;
    const BoundMlp trunk = bind(tape, s.trunk), head = bind(tape, s.d_head);
    Var loss = adv_loss_d(c.base_loss, score(trunk, head, tape.constant(x)),
                          score(trunk, head, tape.constant(fake)));
    const Gradients g = tape.backward(loss);
    std::vector<Tensor> grads;
    for (Var p : trunk.params) grads.push_back(g.of(p));
    for (Var p : head.params) grads.push_back(g.of(p));
    adam_step(d_params(s), grads, s.d_adam, h);
  }
  {
    Tape tape;
    const BoundMlp gen = bind(tape, s.generator);
    const BoundMlp trunk = bind(tape, s.trunk, false), head = bind(tape, s.d_head, false);
    Var fake = add(forward(gen, tape.constant(z)), tape.constant(nf));
    const Gradients g = tape.backward(adv_loss_g(c.base_loss, score(trunk, head, fake)));
    std::vector<Tensor*> params;
    std::vector<Tensor> grads;
    for (std::size_t i = 0; i < gen.params.size(); ++i) {
      params.push_back(&s.generator.params()[i]);
      grads.push_back(g.of(gen.params[i]));
    }
    adam_step(params, grads, s.g_adam, h);
  }
}

}  // namespace plain_gan
