#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ivgan/benchmarks.hpp"
#include "ivgan/interventions.hpp"
#include "ivgan/losses.hpp"
#include "ivgan/networks.hpp"
#include "ivgan/optim.hpp"
#include "ivgan/random.hpp"

namespace ivgan {

struct TrainConfig {
  BaseLoss base_loss = BaseLoss::lsgan;
  std::size_t latent_dim = 8;
  std::size_t blocks = 4;
  std::size_t batch_size = 64;
  std::uint64_t total_iters = 30000;
  std::size_t inner_iters = 1;
  double lr_df = 1e-4;  // D, f and G
  double lr_e = 5e-3;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  RegularizationCoeffs coeffs;
  double noise_sigma0 = 0.1;
  double noise_decay_frac = 0.2;
  std::uint64_t seed = 0;
  DatasetKind dataset = DatasetKind::grid;
  double square_a = 0.5;
  bool d_sees_intervened = false;
  std::uint64_t eval_every = 1000;
  std::uint64_t checkpoint_every = 10000;
  std::size_t eval_samples = 10000;
  std::vector<std::size_t> hidden = {64, 64};

  // Throws ContractError naming the violated rule.
  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

SyntheticDataset make_dataset(const TrainConfig& config);
InterventionGroup make_group(const TrainConfig& config);

// sigma0 * max(0, 1 - iter / (decay_frac * total_iters)); zero when the decay
// window is empty.
double anneal_noise(std::uint64_t iter, std::uint64_t total_iters, double sigma0,
                    double decay_frac);

// Random stream layout. Every draw of iteration t comes from
// RandomSource(seed).substream(kStep).substream(t).substream(pass), split
// further by purpose, so a run can be resumed from parameters alone.
namespace streams {
inline constexpr std::uint64_t kInit = 101;
inline constexpr std::uint64_t kStep = 102;
inline constexpr std::uint64_t kEval = 103;

inline constexpr std::uint64_t kData = 1;
inline constexpr std::uint64_t kPrior = 2;
inline constexpr std::uint64_t kNoise = 3;  // real, fake, intervened, in that order
inline constexpr std::uint64_t kIntervention = 4;
inline constexpr std::uint64_t kReconIntervention = 5;
}  // namespace streams

RandomSource step_stream(std::uint64_t seed, std::uint64_t iter);

// Everything one inner pass consumes.
struct PassDraws {
  Tensor x;           // real batch, n x data_dim
  Tensor z;           // prior batch, n x d
  Tensor noise_real;  // sigma-scaled input noise
  Tensor noise_fake;
  Tensor noise_iv;
  BatchIntervention iv;    // applied to E(x)
  BatchIntervention iv_z;  // applied to z in the latent reconstruction term
};

PassDraws draw_pass(const SyntheticDataset& data, const TrainConfig& config,
                    const InterventionGroup& group, double sigma, RandomSource pass_rng);

struct TrainerState {
  GanModels models;
  AdamState disc;  // trunk, D head, f head
  AdamState gen;
  AdamState enc;
  std::uint64_t iter = 0;  // completed outer iterations

  friend bool operator==(const TrainerState&, const TrainerState&) = default;
};

std::vector<Tensor*> disc_params(GanModels& m);
std::vector<Tensor*> gen_params(GanModels& m);
std::vector<Tensor*> enc_params(GanModels& m);

TrainerState init_trainer(const TrainConfig& config);

class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(std::uint64_t iter, const LossReport& report);
  std::uint64_t iter() const { return iter_; }
  const LossReport& report() const { return report_; }

 private:
  std::uint64_t iter_;
  LossReport report_;
};

// One outer iteration of the alternating algorithm (iteration state.iter + 1):
// per inner pass, a joint discriminator/classifier Adam step; then one
// generator step on adv_g + lambda_gd recon + mu_gd iv and one encoder step on
// lambda_e recon + mu_e iv. Zero coefficients drop their terms from the graph,
// and with mu_gd = mu_e = 0 the classifier is not trained.
LossReport train_step(TrainerState& state, const SyntheticDataset& data,
                      const TrainConfig& config, RandomSource& rng);

// Losses of the current models on a fresh batch, without updating anything.
LossReport evaluate_losses(const GanModels& models, const SyntheticDataset& data,
                           const TrainConfig& config, std::size_t n, RandomSource& rng);

struct MetricsRow {
  std::uint64_t iter = 0;
  double loss_d = 0.0;
  double loss_g_adv = 0.0;
  double classifier_ce = 0.0;
  double iv_ge = 0.0;
  double recon = 0.0;
  double total_g = 0.0;
  std::size_t modes_covered = 0;
  double kl_modes = 0.0;
  double noise_sigma = 0.0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline constexpr const char* kMetricsHeader =
    "iter,loss_d,loss_g_adv,classifier_ce,iv_ge,recon,total_g,modes_covered,kl_modes,noise_sigma";
std::string format_metrics_row(const MetricsRow& row);

// Mode metrics of config.eval_samples generator draws at iteration `iter`.
ModeCoverageReport evaluate_modes(const GanModels& models, const SyntheticDataset& data,
                                  const TrainConfig& config, std::uint64_t iter);

struct LoopOptions {
  std::optional<std::filesystem::path> out_dir;  // metrics.csv and checkpoints
  std::optional<std::filesystem::path> resume_from;
  // Stop after this iteration (simulates an interrupted run); the final
  // checkpoint is then named after the iteration.
  std::optional<std::uint64_t> stop_after;
  std::function<void(const MetricsRow&)> on_metrics;
};

struct TrainResult {
  TrainerState state;
  std::vector<MetricsRow> metrics;
  std::vector<std::filesystem::path> checkpoints;
};

TrainResult train_loop(const TrainConfig& config, const LoopOptions& options = {});

}  // namespace ivgan
