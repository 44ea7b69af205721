#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ivgan/trainer.hpp"

namespace ivgan {

struct RunConfig {
  TrainConfig train;
  std::filesystem::path out_dir = "ivgan_out";
  bool emit_plots = false;
  std::vector<double> a_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::size_t mc_samples = 200000;     // square-fit, per a
  std::size_t n = 100000;              // invariance moment samples
  std::size_t group_n = 500;           // invariance energy test, per side
  std::size_t gradcheck_batch = 4;
  std::string checkpoint;              // eval
  std::vector<std::string> plot_columns = {"loss_d", "loss_g_adv", "recon", "classifier_ce"};

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Flat `key = value` lines, `#` starts a comment. Overrides are applied after
// the file and win. Throws ConfigError naming the key and line (0 for an
// override).
RunConfig parse_config(const std::string& text,
                       const std::vector<std::pair<std::string, std::string>>& overrides = {});
std::string serialize(const RunConfig& config);
std::vector<std::string> config_keys();

enum ExitCode { kExitOk = 0, kExitAbort = 1, kExitConfig = 2 };

int cmd_train(const RunConfig& config, std::ostream& out);
int cmd_eval(const RunConfig& config, std::ostream& out);
int cmd_square_fit(const RunConfig& config, std::ostream& out);
int cmd_gradcheck(const RunConfig& config, std::ostream& out);
int cmd_invariance(const RunConfig& config, std::ostream& out);

inline constexpr double kGradCheckTolerance = 1e-4;

struct GradCheckRow {
  std::string path;   // vanilla_d, vanilla_g, lsgan_d, lsgan_g, recon, intervention
  std::string group;  // encoder, generator, trunk, d_head, f_head
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t excluded = 0;
};

// Every loss path against every parameter group it depends on, at a small
// batch of the given size.
std::vector<GradCheckRow> gradcheck_suite(const TrainConfig& config, std::size_t batch);

struct InvarianceRow {
  std::size_t index = 0;
  double max_abs_mean = 0.0;
  double max_abs_var_dev = 0.0;
  double max_abs_cov = 0.0;
  bool moments_pass = false;
  double energy_p_value = 0.0;
};

inline constexpr double kMeanTolerance = 0.02;
inline constexpr double kVarTolerance = 0.05;
inline constexpr double kCovTolerance = 0.02;

std::vector<InvarianceRow> invariance_suite(const RunConfig& config);

}  // namespace ivgan
