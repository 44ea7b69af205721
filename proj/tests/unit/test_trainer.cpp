#include <cmath>
#include <fstream>
#include <string>

#include "doctest.h"
#include "ivgan/checkpoint.hpp"
#include "ivgan/errors.hpp"
#include "ivgan/ops.hpp"
#include "ivgan/trainer.hpp"
#include "../support/plain_gan.hpp"
#include "../support/scratch.hpp"

using namespace ivgan;

namespace {

TrainConfig tiny() {
  TrainConfig c;
  c.hidden = {16, 16};
  c.batch_size = 16;
  c.total_iters = 20;
  c.eval_every = 5;
  c.checkpoint_every = 10;
  c.eval_samples = 200;
  return c;
}

LossReport one_step(TrainerState& s, const TrainConfig& c) {
  RandomSource rng = step_stream(c.seed, s.iter + 1);
  return train_step(s, make_dataset(c), c, rng);
}

std::size_t count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("anneal_noise schedule") {
  CHECK(anneal_noise(0, 1000, 0.1, 0.2) == 0.1);
  CHECK(anneal_noise(200, 1000, 0.1, 0.2) == 0.0);
  CHECK(anneal_noise(900, 1000, 0.1, 0.2) == 0.0);
  CHECK(anneal_noise(100, 1000, 0.1, 0.2) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(anneal_noise(0, 1000, 0.1, 0.0) == 0.0);
  CHECK(anneal_noise(0, 0, 0.1, 0.2) == 0.0);
}

TEST_CASE("config validation") {
  TrainConfig c = tiny();
  c.latent_dim = 9;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("divide"), ContractError);
  c = tiny();
  c.batch_size = 1;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = tiny();
  c.noise_decay_frac = 1.5;
  CHECK_THROWS_AS(c.validate(), ContractError);
  CHECK_NOTHROW(tiny().validate());
}

TEST_CASE("draw_pass is a pure function of the stream") {
  const TrainConfig c = tiny();
  const auto data = make_dataset(c);
  const auto group = make_group(c);
  const PassDraws a = draw_pass(data, c, group, 0.1, step_stream(0, 3).substream(0));
  const PassDraws b = draw_pass(data, c, group, 0.1, step_stream(0, 3).substream(0));
  const PassDraws other = draw_pass(data, c, group, 0.1, step_stream(0, 4).substream(0));
  CHECK(a.x == b.x);
  CHECK(a.z == b.z);
  CHECK(a.noise_iv == b.noise_iv);
  CHECK(a.iv.labels == b.iv.labels);
  CHECK_FALSE(a.x == other.x);
  const PassDraws quiet = draw_pass(data, c, group, 0.0, step_stream(0, 3).substream(0));
  for (double v : quiet.noise_real.values()) CHECK(v == 0.0);
  CHECK(quiet.x == a.x);
}

TEST_CASE("train_step is deterministic") {
  const TrainConfig c = tiny();
  TrainerState a = init_trainer(c), b = init_trainer(c);
  for (int i = 0; i < 3; ++i) {
    const LossReport ra = one_step(a, c), rb = one_step(b, c);
    CHECK(ra == rb);
    CHECK(ra.all_finite());
  }
  CHECK(a == b);
  CHECK(a.iter == 3);
  CHECK(a.disc.t == 3);
}

TEST_CASE("ablation reduces to a plain GAN step, both base losses") {
  for (BaseLoss loss : {BaseLoss::vanilla, BaseLoss::lsgan}) {
    TrainConfig c = tiny();
    c.base_loss = loss;
    c.coeffs = RegularizationCoeffs{0.0, 0.0, 0.0, 0.0};
    TrainerState s = init_trainer(c);
    plain_gan::State ref = plain_gan::from_models(s.models);
    const GanModels before = s.models;
    const auto data = make_dataset(c);
    for (std::uint64_t it = 1; it <= 5; ++it) {
      one_step(s, c);
      plain_gan::step(ref, data, c, it);
      CHECK(s.models.generator == ref.generator);
      CHECK(s.models.trunk == ref.trunk);
      CHECK(s.models.d_head == ref.d_head);
    }
    CHECK(s.models.encoder == before.encoder);
    CHECK(s.models.f_head == before.f_head);
    CHECK_FALSE(s.models.generator == before.generator);
  }
}

TEST_CASE("classifier head is frozen when no player weighs the IV loss") {
  TrainConfig c = tiny();
  c.coeffs.mu_gd = 0.0;
  c.coeffs.mu_e = 0.0;
  TrainerState s = init_trainer(c);
  const GanModels before = s.models;
  one_step(s, c);
  CHECK(s.models.f_head == before.f_head);
  CHECK_FALSE(s.models.encoder == before.encoder);
}

TEST_CASE("encoder step does not touch the other players") {
  TrainConfig c = tiny();
  TrainerState a = init_trainer(c);
  c.lr_e = 0.5;
  TrainerState b = init_trainer(c);
  one_step(a, tiny());
  one_step(b, c);
  CHECK(a.models.generator == b.models.generator);
  CHECK(a.models.trunk == b.models.trunk);
  CHECK(a.models.d_head == b.models.d_head);
  CHECK(a.models.f_head == b.models.f_head);
  CHECK_FALSE(a.models.encoder == b.models.encoder);

  // With no encoder terms the encoder is left alone.
  TrainConfig frozen = tiny();
  frozen.coeffs.lambda_e = 0.0;
  frozen.coeffs.mu_e = 0.0;
  TrainerState f = init_trainer(frozen);
  const Mlp enc = f.models.encoder;
  one_step(f, frozen);
  CHECK(f.models.encoder == enc);
  CHECK(f.enc.t == 0);
}

TEST_CASE("one classifier step lowers the cross-entropy on a separable batch") {
  const TrainConfig c = tiny();
  TrainerState s = init_trainer(c);
  // Four clusters, one per block label, well apart.
  const double cx[4] = {-2, 2, -2, 2}, cy[4] = {-2, -2, 2, 2};
  Tensor x({32, 2}), labels({32, 4});
  RandomSource rng(11);
  const Tensor jitter = gaussian(rng, {32, 2});
  for (std::size_t r = 0; r < 32; ++r) {
    x(r, 0) = cx[r % 4] + 0.1 * jitter(r, 0);
    x(r, 1) = cy[r % 4] + 0.1 * jitter(r, 1);
    labels(r, r % 4) = 1.0;
  }
  const double before = classifier_ce(classify(s.models, x), labels);
  Tape tape;
  const BoundModels b = bind(tape, s.models, Trainable{false, false, true, false, true});
  const Gradients g = tape.backward(classifier_ce(classify(b, tape.constant(x)), labels));
  std::vector<Tensor*> params;
  std::vector<Tensor> grads;
  for (auto [net, bound] : {std::pair{&s.models.trunk, &b.trunk}, std::pair{&s.models.f_head, &b.f_head}}) {
    for (std::size_t i = 0; i < bound->params.size(); ++i) {
      params.push_back(&net->params()[i]);
      grads.push_back(g.of(bound->params[i]));
    }
  }
  AdamState st;
  adam_step(params, grads, st, AdamHyper{1e-3, 0.5, 0.999, 1e-8});
  const double after = classifier_ce(classify(s.models, x), labels);
  CHECK(after < before);
}

TEST_CASE("adam: zero gradient leaves parameters and decays moments") {
  Tensor p({2}, {1.0, -2.0});
  std::vector<Tensor*> ps{&p};
  AdamState st;
  st.m = {Tensor({2}, {0.4, -0.2})};
  st.v = {Tensor({2}, {0.1, 0.3})};
  adam_step(ps, std::vector<Tensor>{Tensor({2})}, st, AdamHyper{0.1, 0.5, 0.9, 1e-8});
  CHECK(st.t == 1);
  CHECK(st.m[0][0] == doctest::Approx(0.2));
  CHECK(st.v[0][1] == doctest::Approx(0.27));
  // Non-zero moments still move the parameter; only a clean state does not.
  AdamState clean;
  Tensor q({2}, {1.0, -2.0});
  std::vector<Tensor*> qs{&q};
  adam_step(qs, std::vector<Tensor>{Tensor({2})}, clean, AdamHyper{});
  CHECK(q == Tensor({2}, {1.0, -2.0}));
}

TEST_CASE("adam: first step has magnitude lr along -sign(g)") {
  Tensor p({3}, {0.0, 0.0, 0.0});
  std::vector<Tensor*> ps{&p};
  AdamState st;
  adam_step(ps, std::vector<Tensor>{Tensor({3}, {3.0, -0.01, 250.0})}, st, AdamHyper{1e-2, 0.5, 0.999, 1e-8});
  CHECK(p[0] == doctest::Approx(-1e-2).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(1e-2).epsilon(1e-5));
  CHECK(p[2] == doctest::Approx(-1e-2).epsilon(1e-6));
}

TEST_CASE("adam: parameter groups are independent") {
  Tensor a({2}, {1.0, 2.0}), b({1}, {5.0});
  std::vector<Tensor*> both{&a, &b};
  AdamState joint;
  const std::vector<Tensor> g{Tensor({2}, {0.3, -0.7}), Tensor({1}, {2.0})};
  adam_step(both, g, joint, AdamHyper{});

  Tensor a2({2}, {1.0, 2.0});
  std::vector<Tensor*> only{&a2};
  AdamState alone;
  adam_step(only, std::vector<Tensor>{g[0]}, alone, AdamHyper{});
  CHECK(a == a2);
  CHECK_THROWS(adam_step(both, std::vector<Tensor>{g[0]}, joint, AdamHyper{}));
}

TEST_CASE("zero iterations writes only the initial checkpoint") {
  ScratchDir dir("zero_iters");
  TrainConfig c = tiny();
  c.total_iters = 0;
  const TrainResult r = train_loop(c, {.out_dir = dir.path()});
  CHECK(r.metrics.empty());
  REQUIRE(r.checkpoints.size() == 1);
  CHECK(load_checkpoint(r.checkpoints[0]).state == init_trainer(c));
  CHECK(count_lines(dir / "metrics.csv") == 1);
}

TEST_CASE("train_loop metrics and checkpoints") {
  ScratchDir dir("loop");
  const TrainConfig c = tiny();
  std::vector<std::uint64_t> seen;
  const TrainResult r = train_loop(c, {.out_dir = dir.path(),
                                       .on_metrics = [&](const MetricsRow& m) { seen.push_back(m.iter); }});
  REQUIRE(r.metrics.size() == 4);
  for (std::size_t i = 0; i < r.metrics.size(); ++i) {
    const MetricsRow& m = r.metrics[i];
    CHECK(m.iter == 5 * (i + 1));
    CHECK(m.noise_sigma == anneal_noise(m.iter, c.total_iters, c.noise_sigma0, c.noise_decay_frac));
    CHECK(std::isfinite(m.loss_d));
    CHECK(m.iv_ge == -m.classifier_ce);
    if (i > 0) CHECK(m.iter > r.metrics[i - 1].iter);
  }
  CHECK(seen == std::vector<std::uint64_t>{5, 10, 15, 20});
  CHECK(count_lines(dir / "metrics.csv") == 5);
  REQUIRE(r.checkpoints.size() == 2);
  CHECK(r.checkpoints[0].filename() == "checkpoint_10.ivgn");
  CHECK(r.checkpoints[1].filename() == "final.ivgn");
  CHECK(load_checkpoint(r.checkpoints[1]).state == r.state);
  CHECK(r.state.iter == 20);
}

TEST_CASE("non-finite loss aborts with a snapshot") {
  ScratchDir dir("abort");
  const TrainConfig c = tiny();
  TrainerState s = init_trainer(c);
  s.models.generator.weight(0)[0] = std::nan("");
  save_checkpoint(s, c, dir / "poisoned.ivgn");
  const std::filesystem::path run = dir / "run";
  CHECK_THROWS_AS(train_loop(c, {.out_dir = run, .resume_from = dir / "poisoned.ivgn"}), NonFiniteLoss);
  CHECK(std::filesystem::exists(run / "abort_snapshot.ivgn"));
  CHECK(count_lines(run / "metrics.csv") == 1);
}
