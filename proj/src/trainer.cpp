#include "ivgan/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ivgan/checkpoint.hpp"
#include "ivgan/errors.hpp"
#include "ivgan/ops.hpp"

namespace ivgan {

namespace {

constexpr std::size_t kDataDim = 2;

Tensor scaled(Tensor t, double factor) {
  for (double& v : t.data()) v *= factor;
  return t;
}

Tensor plus(Tensor a, const Tensor& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  std::vector<double> data(a.values());
  data.insert(data.end(), b.values().begin(), b.values().end());
  return Tensor({a.dim(0) + b.dim(0), a.dim(1)}, std::move(data));
}

AdamHyper hyper(const TrainConfig& c, double lr) {
  return AdamHyper{lr, c.adam_beta1, c.adam_beta2, c.adam_eps};
}

std::vector<Tensor> grads_of(const Gradients& g, std::initializer_list<const BoundMlp*> nets) {
  std::vector<Tensor> out;
  for (const BoundMlp* net : nets)
    for (Var p : net->params) out.push_back(g.of(p));
  return out;
}

void append(std::vector<Tensor*>& out, Mlp& net) {
  for (Tensor& p : net.params()) out.push_back(&p);
}

double sigma_at(const TrainConfig& c, std::uint64_t iter) {
  return anneal_noise(iter, c.total_iters, c.noise_sigma0, c.noise_decay_frac);
}

// Intervened samples G(O_i(E(x))) + noise, as plain values.
Tensor intervened_samples(const GanModels& m, const PassDraws& d) {
  return plus(generate(m, apply(d.iv, encode(m, d.x))), d.noise_iv);
}

struct DiscGraph {
  Var loss_d;
  std::optional<Var> ce;
};

DiscGraph build_disc(Tape& tape, const BoundModels& b, const GanModels& m, const PassDraws& d,
                     const TrainConfig& c, bool iv_active) {
  const Tensor fake = plus(generate(m, d.z), d.noise_fake);
  Tensor x_iv;
  if (iv_active || c.d_sees_intervened) x_iv = intervened_samples(m, d);
  Var real = tape.constant(plus(d.x, d.noise_real));
  Var fakes = tape.constant(c.d_sees_intervened ? concat_rows(fake, x_iv) : fake);
  DiscGraph g{adv_loss_d(c.base_loss, discriminate(b, real), discriminate(b, fakes)), std::nullopt};
  if (iv_active) g.ce = classifier_ce(classify(b, tape.constant(x_iv)), d.iv.labels);
  return g;
}

struct GeGraph {
  Var adv_g;
  Var recon;
  Var ce;
  Var iv_ge;
};

GeGraph build_ge(Tape& tape, const BoundModels& b, const PassDraws& d, const TrainConfig& c) {
  Var fake = add(generate(b, tape.constant(d.z)), tape.constant(d.noise_fake));
  Var adv_g = adv_loss_g(c.base_loss, discriminate(b, fake));

  Var x = tape.constant(d.x);
  Var w = encode(b, x);
  Var x_rec = generate(b, w);
  Var z_int = tape.constant(apply(d.iv_z, d.z));
  Var z_rec = encode(b, generate(b, z_int));
  Var recon = recon_loss(x, x_rec, z_int, z_rec);

  Var x_iv = add(generate(b, apply(d.iv, w)), tape.constant(d.noise_iv));
  Var ce = classifier_ce(classify(b, x_iv), d.iv.labels);
  return GeGraph{adv_g, recon, ce, neg(ce)};
}

LossReport report_from(double adv_d, const GeGraph& g, const RegularizationCoeffs& coeffs) {
  LossReport r;
  r.adv_d = adv_d;
  r.adv_g = g.adv_g.value().item();
  r.iv_classifier_ce = g.ce.value().item();
  r.iv_generator = -r.iv_classifier_ce;
  r.recon = g.recon.value().item();
  r.total_g = total_ge_loss(r.adv_g, r.recon, r.iv_generator, coeffs, LossRole::generator_discriminator);
  return r;
}

}  // namespace

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ContractError(what);
  };
  require(blocks > 0 && latent_dim > 0 && latent_dim % blocks == 0,
          "blocks k=" + std::to_string(blocks) + " must divide latent_dim d=" +
              std::to_string(latent_dim));
  require(batch_size >= 2, "batch_size must be at least 2");
  require(inner_iters >= 1, "inner_iters must be at least 1");
  require(lr_df > 0.0, "lr_df must be positive");
  require(lr_e > 0.0, "lr_e must be positive");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0,
          "adam betas must lie in [0, 1)");
  require(adam_eps > 0.0, "adam_eps must be positive");
  coeffs.validate();
  require(noise_sigma0 >= 0.0 && std::isfinite(noise_sigma0), "noise_sigma0 must be >= 0");
  require(noise_decay_frac >= 0.0 && noise_decay_frac <= 1.0, "noise_decay_frac must lie in [0, 1]");
  require(square_a >= 0.0 && square_a <= 1.0, "square_a must lie in [0, 1]");
  require(eval_samples >= 1, "eval_samples must be at least 1");
  require(!hidden.empty(), "hidden widths must be non-empty");
  for (auto h : hidden) require(h > 0, "hidden widths must be positive");
}

SyntheticDataset make_dataset(const TrainConfig& config) {
  switch (config.dataset) {
    case DatasetKind::grid: return SyntheticDataset::grid();
    case DatasetKind::ring: return SyntheticDataset::ring();
    case DatasetKind::square_pair: return SyntheticDataset::square_pair(config.square_a);
  }
  throw ContractError("unknown dataset kind");
}

InterventionGroup make_group(const TrainConfig& config) {
  return InterventionGroup::block_substitution(config.blocks, config.latent_dim);
}

double anneal_noise(std::uint64_t iter, std::uint64_t total_iters, double sigma0,
                    double decay_frac) {
  const double window = decay_frac * static_cast<double>(total_iters);
  if (!(window > 0.0)) return 0.0;
  return sigma0 * std::max(0.0, 1.0 - static_cast<double>(iter) / window);
}

RandomSource step_stream(std::uint64_t seed, std::uint64_t iter) {
  return RandomSource(seed).substream(streams::kStep).substream(iter);
}

PassDraws draw_pass(const SyntheticDataset& data, const TrainConfig& config,
                    const InterventionGroup& group, double sigma, RandomSource pass_rng) {
  const std::size_t n = config.batch_size;
  PassDraws d;
  RandomSource data_rng = pass_rng.substream(streams::kData);
  d.x = sample_dataset(data, n, data_rng);
  RandomSource prior = pass_rng.substream(streams::kPrior);
  d.z = gaussian(prior, {n, config.latent_dim});
  RandomSource noise = pass_rng.substream(streams::kNoise);
  d.noise_real = scaled(gaussian(noise, {n, kDataDim}), sigma);
  d.noise_fake = scaled(gaussian(noise, {n, kDataDim}), sigma);
  d.noise_iv = scaled(gaussian(noise, {n, kDataDim}), sigma);
  RandomSource iv = pass_rng.substream(streams::kIntervention);
  d.iv = draw_batch_intervention(group, n, iv);
  RandomSource iv_z = pass_rng.substream(streams::kReconIntervention);
  d.iv_z = draw_batch_intervention(group, n, iv_z);
  return d;
}

std::vector<Tensor*> disc_params(GanModels& m) {
  std::vector<Tensor*> out;
  append(out, m.trunk);
  append(out, m.d_head);
  append(out, m.f_head);
  return out;
}

std::vector<Tensor*> gen_params(GanModels& m) {
  std::vector<Tensor*> out;
  append(out, m.generator);
  return out;
}

std::vector<Tensor*> enc_params(GanModels& m) {
  std::vector<Tensor*> out;
  append(out, m.encoder);
  return out;
}

TrainerState init_trainer(const TrainConfig& config) {
  config.validate();
  RandomSource rng = RandomSource(config.seed).substream(streams::kInit);
  TrainerState s;
  s.models = init_models(kDataDim, config.latent_dim, config.blocks,
                         default_model_specs(kDataDim, config.latent_dim, config.blocks, config.hidden),
                         rng);
  s.disc = AdamState::zeros_like(disc_params(s.models));
  s.gen = AdamState::zeros_like(gen_params(s.models));
  s.enc = AdamState::zeros_like(enc_params(s.models));
  return s;
}

namespace {

std::string describe(const LossReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "adv_d=%g adv_g=%g classifier_ce=%g iv_ge=%g recon=%g total_g=%g", r.adv_d,
                r.adv_g, r.iv_classifier_ce, r.iv_generator, r.recon, r.total_g);
  return buf;
}

}  // namespace

NonFiniteLoss::NonFiniteLoss(std::uint64_t iter, const LossReport& report)
    : std::runtime_error("non-finite loss at iteration " + std::to_string(iter) + ": " +
                         describe(report)),
      iter_(iter),
      report_(report) {}

LossReport train_step(TrainerState& state, const SyntheticDataset& data,
                      const TrainConfig& config, RandomSource& rng) {
  const std::uint64_t iter = state.iter + 1;
  const double sigma = sigma_at(config, iter);
  const InterventionGroup group = make_group(config);
  const bool iv_active = config.coeffs.intervention_active();
  GanModels& m = state.models;

  PassDraws d;
  double adv_d = 0.0;
  for (std::size_t pass = 0; pass < config.inner_iters; ++pass) {
    d = draw_pass(data, config, group, sigma, rng.substream(pass));
    Tape tape;
    const BoundModels b =
        bind(tape, m, Trainable{.encoder = false, .generator = false, .f_head = iv_active});
    const DiscGraph g = build_disc(tape, b, m, d, config, iv_active);
    adv_d = g.loss_d.value().item();
    Var loss = g.ce ? add(g.loss_d, *g.ce) : g.loss_d;
    if (!std::isfinite(loss.value().item())) {
      LossReport bad;
      bad.adv_d = adv_d;
      if (g.ce) bad.iv_classifier_ce = g.ce->value().item();
      throw NonFiniteLoss(iter, bad);
    }
    const Gradients grads = tape.backward(loss);
    adam_step(disc_params(m), grads_of(grads, {&b.trunk, &b.d_head, &b.f_head}), state.disc,
              hyper(config, config.lr_df));
  }

  Tape tape;
  const BoundModels b =
      bind(tape, m, Trainable{.trunk = false, .d_head = false, .f_head = false});
  const GeGraph g = build_ge(tape, b, d, config);
  const RegularizationCoeffs& c = config.coeffs;
  const LossReport report = report_from(adv_d, g, c);
  if (!report.all_finite()) throw NonFiniteLoss(iter, report);

  Var total_g = g.adv_g;
  if (c.lambda_gd != 0.0) total_g = add(total_g, scale(g.recon, c.lambda_gd));
  if (c.mu_gd != 0.0) total_g = add(total_g, scale(g.iv_ge, c.mu_gd));
  std::optional<Var> total_e;
  if (c.lambda_e != 0.0) total_e = scale(g.recon, c.lambda_e);
  if (c.mu_e != 0.0) {
    Var term = scale(g.iv_ge, c.mu_e);
    total_e = total_e ? add(*total_e, term) : term;
  }

  const Gradients gg = tape.backward(total_g);
  std::vector<Tensor> enc_grads;
  if (total_e) enc_grads = grads_of(tape.backward(*total_e), {&b.encoder});
  adam_step(gen_params(m), grads_of(gg, {&b.generator}), state.gen, hyper(config, config.lr_df));
  if (total_e) adam_step(enc_params(m), enc_grads, state.enc, hyper(config, config.lr_e));

  state.iter = iter;
  return report;
}

LossReport evaluate_losses(const GanModels& models, const SyntheticDataset& data,
                           const TrainConfig& config, std::size_t n, RandomSource& rng) {
  TrainConfig eval = config;
  eval.batch_size = n;
  const PassDraws d = draw_pass(data, eval, make_group(config), 0.0, rng);
  Tape dtape;
  const BoundModels db = bind(dtape, models, Trainable{false, false, false, false, false});
  const DiscGraph dg = build_disc(dtape, db, models, d, eval, false);
  Tape tape;
  const BoundModels b = bind(tape, models, Trainable{false, false, false, false, false});
  return report_from(dg.loss_d.value().item(), build_ge(tape, b, d, eval), config.coeffs);
}

std::string format_metrics_row(const MetricsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%zu,%.17g,%.17g",
                static_cast<unsigned long long>(r.iter), r.loss_d, r.loss_g_adv, r.classifier_ce,
                r.iv_ge, r.recon, r.total_g, r.modes_covered, r.kl_modes, r.noise_sigma);
  return buf;
}

ModeCoverageReport evaluate_modes(const GanModels& models, const SyntheticDataset& data,
                                  const TrainConfig& config, std::uint64_t iter) {
  RandomSource rng = RandomSource(config.seed).substream(streams::kEval).substream(iter);
  const Tensor samples = generate(models, gaussian(rng, {config.eval_samples, config.latent_dim}));
  if (data.mode_centers.empty()) return ModeCoverageReport{};
  return mode_coverage(samples, data.mode_centers, data.component_sigma,
                       default_min_count(config.eval_samples, data.mode_centers.size()));
}

TrainResult train_loop(const TrainConfig& config, const LoopOptions& options) {
  config.validate();
  const SyntheticDataset data = make_dataset(config);
  TrainResult result;
  if (options.resume_from) {
    Checkpoint ck = load_checkpoint(*options.resume_from);
    if (!(ck.config == config)) {
      throw ContractError("checkpoint " + options.resume_from->string() +
                          " was written with a different configuration");
    }
    result.state = std::move(ck.state);
  } else {
    result.state = init_trainer(config);
  }

  std::ofstream metrics;
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    metrics.open(*options.out_dir / "metrics.csv", std::ios::trunc);
    if (!metrics) throw std::runtime_error("cannot write metrics.csv in " + options.out_dir->string());
    metrics << kMetricsHeader << '\n' << std::flush;
  }
  auto save = [&](const std::string& name) {
    if (!options.out_dir) return;
    const auto path = *options.out_dir / name;
    save_checkpoint(result.state, config, path);
    result.checkpoints.push_back(path);
  };

  const std::uint64_t stop = options.stop_after ? std::min(*options.stop_after, config.total_iters)
                                                : config.total_iters;
  try {
    while (result.state.iter < stop) {
      RandomSource rng = step_stream(config.seed, result.state.iter + 1);
      const LossReport report = train_step(result.state, data, config, rng);
      const std::uint64_t it = result.state.iter;
      if (config.eval_every != 0 && it % config.eval_every == 0) {
        const ModeCoverageReport modes = evaluate_modes(result.state.models, data, config, it);
        const MetricsRow row{it,           report.adv_d,        report.adv_g,
                             report.iv_classifier_ce,           report.iv_generator,
                             report.recon, report.total_g,      modes.modes_covered,
                             modes.kl_to_uniform,               sigma_at(config, it)};
        result.metrics.push_back(row);
        if (metrics.is_open()) metrics << format_metrics_row(row) << '\n' << std::flush;
        if (options.on_metrics) options.on_metrics(row);
      }
      if (config.checkpoint_every != 0 && it % config.checkpoint_every == 0 && it != stop) {
        save("checkpoint_" + std::to_string(it) + ".ivgn");
      }
    }
  } catch (const NonFiniteLoss&) {
    save("abort_snapshot.ivgn");
    throw;
  }
  save(stop == config.total_iters ? "final.ivgn" : "checkpoint_" + std::to_string(stop) + ".ivgn");
  return result;
}

}  // namespace ivgan
