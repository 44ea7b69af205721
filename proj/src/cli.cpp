#include "ivgan/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "ivgan/benchmarks.hpp"
#include "ivgan/checkpoint.hpp"
#include "ivgan/errors.hpp"
#include "ivgan/gradcheck.hpp"
#include "ivgan/ops.hpp"
#include "ivgan/plot.hpp"

namespace ivgan {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Tensor plus_noise(Tensor x, const Tensor& noise) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += noise[i];
  return x;
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;  // throws std::invalid_argument
  std::function<std::string(const RunConfig&)> get;
};

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected a nonnegative integer, got '" + s + "'");
  }
  return v;
}

double to_double(const std::string& s) {
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("expected a finite number, got '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

template <typename T>
Field integer(T TrainConfig::*member) {
  return {[member](RunConfig& c, const std::string& v) { c.train.*member = static_cast<T>(to_u64(v)); },
          [member](const RunConfig& c) { return std::to_string(c.train.*member); }};
}

Field real(double TrainConfig::*member) {
  return {[member](RunConfig& c, const std::string& v) { c.train.*member = to_double(v); },
          [member](const RunConfig& c) { return fmt_double(c.train.*member); }};
}

Field coeff(double RegularizationCoeffs::*member) {
  return {[member](RunConfig& c, const std::string& v) { c.train.coeffs.*member = to_double(v); },
          [member](const RunConfig& c) { return fmt_double(c.train.coeffs.*member); }};
}

template <typename T>
Field run_integer(T RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& v) { c.*member = static_cast<T>(to_u64(v)); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

// Ordered as serialize() writes them.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"base_loss",
       {[](RunConfig& c, const std::string& v) {
          if (v == "lsgan") c.train.base_loss = BaseLoss::lsgan;
          else if (v == "vanilla") c.train.base_loss = BaseLoss::vanilla;
          else throw std::invalid_argument("expected lsgan or vanilla, got '" + v + "'");
        },
        [](const RunConfig& c) {
          return std::string(c.train.base_loss == BaseLoss::lsgan ? "lsgan" : "vanilla");
        }}},
      {"latent_dim", integer(&TrainConfig::latent_dim)},
      {"blocks", integer(&TrainConfig::blocks)},
      {"batch_size", integer(&TrainConfig::batch_size)},
      {"total_iters", integer(&TrainConfig::total_iters)},
      {"inner_iters", integer(&TrainConfig::inner_iters)},
      {"lr_df", real(&TrainConfig::lr_df)},
      {"lr_e", real(&TrainConfig::lr_e)},
      {"adam_beta1", real(&TrainConfig::adam_beta1)},
      {"adam_beta2", real(&TrainConfig::adam_beta2)},
      {"adam_eps", real(&TrainConfig::adam_eps)},
      {"lambda_gd", coeff(&RegularizationCoeffs::lambda_gd)},
      {"mu_gd", coeff(&RegularizationCoeffs::mu_gd)},
      {"lambda_e", coeff(&RegularizationCoeffs::lambda_e)},
      {"mu_e", coeff(&RegularizationCoeffs::mu_e)},
      {"noise_sigma0", real(&TrainConfig::noise_sigma0)},
      {"noise_decay_frac", real(&TrainConfig::noise_decay_frac)},
      {"seed", integer(&TrainConfig::seed)},
      {"dataset",
       {[](RunConfig& c, const std::string& v) { c.train.dataset = dataset_from_string(v); },
        [](const RunConfig& c) { return to_string(c.train.dataset); }}},
      {"square_a", real(&TrainConfig::square_a)},
      {"d_sees_intervened",
       {[](RunConfig& c, const std::string& v) { c.train.d_sees_intervened = to_bool(v); },
        [](const RunConfig& c) { return std::string(c.train.d_sees_intervened ? "true" : "false"); }}},
      {"eval_every", integer(&TrainConfig::eval_every)},
      {"checkpoint_every", integer(&TrainConfig::checkpoint_every)},
      {"eval_samples", integer(&TrainConfig::eval_samples)},
      {"hidden",
       {[](RunConfig& c, const std::string& v) {
          c.train.hidden.clear();
          for (const auto& item : split_list(v)) c.train.hidden.push_back(to_u64(item));
        },
        [](const RunConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.train.hidden.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(c.train.hidden[i]);
          }
          return s;
        }}},
      {"out_dir",
       {[](RunConfig& c, const std::string& v) {
          if (v.empty()) throw std::invalid_argument("out_dir must not be empty");
          c.out_dir = v;
        },
        [](const RunConfig& c) { return c.out_dir.string(); }}},
      {"emit_plots",
       {[](RunConfig& c, const std::string& v) { c.emit_plots = to_bool(v); },
        [](const RunConfig& c) { return std::string(c.emit_plots ? "true" : "false"); }}},
      {"a_grid",
       {[](RunConfig& c, const std::string& v) {
          c.a_grid.clear();
          for (const auto& item : split_list(v)) c.a_grid.push_back(to_double(item));
        },
        [](const RunConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.a_grid.size(); ++i) {
            if (i) s += ",";
            s += fmt_double(c.a_grid[i]);
          }
          return s;
        }}},
      {"mc_samples", run_integer(&RunConfig::mc_samples)},
      {"n", run_integer(&RunConfig::n)},
      {"group_n", run_integer(&RunConfig::group_n)},
      {"gradcheck_batch", run_integer(&RunConfig::gradcheck_batch)},
      {"checkpoint",
       {[](RunConfig& c, const std::string& v) { c.checkpoint = v; },
        [](const RunConfig& c) { return c.checkpoint; }}},
      {"plot_columns",
       {[](RunConfig& c, const std::string& v) { c.plot_columns = split_list(v); },
        [](const RunConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.plot_columns.size(); ++i) {
            if (i) s += ",";
            s += c.plot_columns[i];
          }
          return s;
        }}},
  };
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& [name, field] : fields())
    if (name == key) return &field;
  return nullptr;
}

void assign(RunConfig& c, const std::string& key, const std::string& value, int line) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError(key, line, "unknown configuration key '" + key + "'");
  try {
    f->set(c, value);
  } catch (const std::exception& e) {
    throw ConfigError(key, line, key + ": " + e.what());
  }
}

void check(const RunConfig& c, const std::map<std::string, int>& lines) {
  auto line_of = [&](const std::string& key) {
    auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  };
  const TrainConfig& t = c.train;
  if (t.blocks == 0 || t.latent_dim == 0 || t.latent_dim % t.blocks != 0) {
    const std::string key = lines.count("latent_dim") ? "latent_dim" : "blocks";
    throw ConfigError(key, line_of(key),
                      "blocks k=" + std::to_string(t.blocks) + " must divide latent_dim d=" +
                          std::to_string(t.latent_dim));
  }
  try {
    t.validate();
  } catch (const ContractError& e) {
    // Attribute the violated rule to the first key its message names.
    const std::string msg = e.what();
    std::string key = "config";
    std::size_t best = std::string::npos;
    for (const auto& [name, field] : fields()) {
      const auto pos = msg.find(name);
      if (pos != std::string::npos && (best == std::string::npos || pos < best ||
                                       (pos == best && name.size() > key.size()))) {
        best = pos;
        key = name;
      }
    }
    if (key == "config" && msg.find("regularization") != std::string::npos) key = "lambda_gd";
    throw ConfigError(key, line_of(key), msg);
  }
  if (c.a_grid.empty()) throw ConfigError("a_grid", line_of("a_grid"), "a_grid must be non-empty");
  for (double a : c.a_grid) {
    if (a < 0.0 || a > 1.0) throw ConfigError("a_grid", line_of("a_grid"), "a_grid values must lie in [0, 1]");
  }
  if (c.mc_samples < 1000) throw ConfigError("mc_samples", line_of("mc_samples"), "mc_samples must be at least 1000");
  if (c.n < 1000) throw ConfigError("n", line_of("n"), "n must be at least 1000");
  if (c.group_n < 2) throw ConfigError("group_n", line_of("group_n"), "group_n must be at least 2");
  if (c.gradcheck_batch < 1) {
    throw ConfigError("gradcheck_batch", line_of("gradcheck_batch"), "gradcheck_batch must be positive");
  }
}

std::string join_row(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ",";
    s += cells[i];
  }
  return s;
}

Mlp& net_of(GanModels& m, const std::string& group) {
  if (group == "encoder") return m.encoder;
  if (group == "generator") return m.generator;
  if (group == "trunk") return m.trunk;
  if (group == "d_head") return m.d_head;
  return m.f_head;
}

BoundMlp& net_of(BoundModels& m, const std::string& group) {
  if (group == "encoder") return m.encoder;
  if (group == "generator") return m.generator;
  if (group == "trunk") return m.trunk;
  if (group == "d_head") return m.d_head;
  return m.f_head;
}

struct LossPath {
  std::string name;
  std::vector<std::string> groups;
  std::function<Var(Tape&, const BoundModels&)> loss;
};

std::filesystem::path checkpoint_path(const RunConfig& c) {
  return c.checkpoint.empty() ? c.out_dir / "final.ivgn" : std::filesystem::path(c.checkpoint);
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [name, field] : fields()) keys.push_back(name);
  return keys;
}

RunConfig parse_config(const std::string& text,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig c;
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(body, line, "line " + std::to_string(line) + ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    if (lines.count(key)) {
      throw ConfigError(key, line, "line " + std::to_string(line) + ": duplicate key '" + key + "'");
    }
    try {
      assign(c, key, trim(body.substr(eq + 1)), line);
    } catch (const ConfigError& e) {
      throw ConfigError(e.key(), e.line(), "line " + std::to_string(line) + ": " + e.what());
    }
    lines[key] = line;
  }
  for (const auto& [key, value] : overrides) {
    assign(c, key, trim(value), 0);
    lines[key] = 0;
  }
  check(c, lines);
  return c;
}

std::string serialize(const RunConfig& config) {
  std::string out;
  for (const auto& [name, field] : fields()) out += name + " = " + field.get(config) + "\n";
  return out;
}

std::vector<GradCheckRow> gradcheck_suite(const TrainConfig& config, std::size_t batch) {
  TrainConfig cfg = config;
  cfg.batch_size = batch;
  const SyntheticDataset data = make_dataset(cfg);
  RandomSource rng = RandomSource(cfg.seed).substream(streams::kEval).substream(0xC0FFEE);
  GanModels models = init_trainer(cfg).models;
  const PassDraws d = draw_pass(data, cfg, make_group(cfg), cfg.noise_sigma0, rng);

  auto adv = [&d](BaseLoss kind, bool disc) {
    return [&d, kind, disc](Tape& tape, const BoundModels& b) {
      Var fake = add(generate(b, tape.constant(d.z)), tape.constant(d.noise_fake));
      if (!disc) return adv_loss_g(kind, discriminate(b, fake));
      Var real = tape.constant(plus_noise(d.x, d.noise_real));
      return adv_loss_d(kind, discriminate(b, real), discriminate(b, fake));
    };
  };
  const std::vector<std::string> adv_groups = {"generator", "trunk", "d_head"};
  const std::vector<LossPath> paths = {
      {"vanilla_d", adv_groups, adv(BaseLoss::vanilla, true)},
      {"vanilla_g", adv_groups, adv(BaseLoss::vanilla, false)},
      {"lsgan_d", adv_groups, adv(BaseLoss::lsgan, true)},
      {"lsgan_g", adv_groups, adv(BaseLoss::lsgan, false)},
      {"recon",
       {"encoder", "generator"},
       [&d](Tape& tape, const BoundModels& b) {
         Var x = tape.constant(d.x);
         Var z_int = tape.constant(apply(d.iv_z, d.z));
         return recon_loss(x, generate(b, encode(b, x)), z_int, encode(b, generate(b, z_int)));
       }},
      {"intervention",
       {"encoder", "generator", "trunk", "f_head"},
       [&d](Tape& tape, const BoundModels& b) {
         Var w = encode(b, tape.constant(d.x));
         Var x_iv = add(generate(b, apply(d.iv, w)), tape.constant(d.noise_iv));
         return classifier_ce(classify(b, x_iv), d.iv.labels);
       }},
  };

  std::vector<GradCheckRow> rows;
  for (const LossPath& path : paths) {
    for (const std::string& group : path.groups) {
      GradCheckRow row{path.name, group};
      const Mlp& net = net_of(models, group);
      for (std::size_t i = 0; i < net.params().size(); ++i) {
        const ScalarFn f = [&, i](Tape& tape, Var x) {
          BoundModels b = bind(tape, models, Trainable{false, false, false, false, false});
          net_of(b, group).params[i] = x;
          return path.loss(tape, b);
        };
        const GradCheckResult r = grad_check(f, net.params()[i]);
        row.max_rel_error = std::max(row.max_rel_error, r.max_rel_error);
        row.checked += r.checked;
        row.excluded += r.excluded.size();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<InvarianceRow> invariance_suite(const RunConfig& config) {
  const InterventionGroup group = make_group(config.train);
  RandomSource rng = RandomSource(config.train.seed).substream(streams::kEval).substream(0x1A7);
  RandomSource moments = rng.substream(1);
  RandomSource energy = rng.substream(2);
  const std::size_t d = group.latent_dim();
  const GroupInvarianceReport report = group_invariance_check(
      group, [d](RandomSource& r, std::size_t n) { return gaussian(r, {n, d}); }, config.group_n,
      energy);

  std::vector<InvarianceRow> rows;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const InvarianceStats s = invariance_statistic(group[i], config.n, moments);
    InvarianceRow row;
    row.index = i;
    for (std::size_t c = 0; c < d; ++c) {
      row.max_abs_mean = std::max(row.max_abs_mean, std::abs(s.mean[c]));
      row.max_abs_var_dev = std::max(row.max_abs_var_dev, std::abs(s.variance[c] - 1.0));
      row.max_abs_cov = std::max(row.max_abs_cov, s.max_abs_cov[c]);
    }
    row.moments_pass = row.max_abs_mean < kMeanTolerance && row.max_abs_var_dev < kVarTolerance &&
                       row.max_abs_cov < kCovTolerance;
    row.energy_p_value = report.p_values[i];
    rows.push_back(row);
  }
  return rows;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
  std::filesystem::create_directories(config.out_dir);
  {
    std::ofstream echo(config.out_dir / "config.txt");
    echo << serialize(config);
  }
  LoopOptions options;
  options.out_dir = config.out_dir;
  options.on_metrics = [&out](const MetricsRow& row) { out << format_metrics_row(row) << '\n' << std::flush; };
  TrainResult result;
  try {
    result = train_loop(config.train, options);
  } catch (const NonFiniteLoss& e) {
    out << "aborted: " << e.what() << '\n';
    return kExitAbort;
  }

  const SyntheticDataset data = make_dataset(config.train);
  const ModeCoverageReport modes = evaluate_modes(result.state.models, data, config.train, result.state.iter);
  std::ostringstream report;
  report << "iterations " << result.state.iter << '\n'
         << "modes_covered " << modes.modes_covered << " of " << data.mode_centers.size() << '\n'
         << "kl_modes " << fmt_g(modes.kl_to_uniform) << '\n';
  for (const auto& p : result.checkpoints) report << "checkpoint " << p.string() << '\n';
  std::ofstream(config.out_dir / "report.txt") << report.str();
  out << report.str();

  if (config.emit_plots) {
    emit_plot(config.out_dir / "metrics.csv", config.plot_columns, config.out_dir / "training_curves.svg");
    out << "plot " << (config.out_dir / "training_curves.svg").string() << '\n';
  }
  return kExitOk;
}

int cmd_eval(const RunConfig& config, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(checkpoint_path(config));
  const TrainConfig& tc = ck.config;
  const SyntheticDataset data = make_dataset(tc);
  const ModeCoverageReport modes = evaluate_modes(ck.state.models, data, tc, ck.state.iter);
  out << "iteration " << ck.state.iter << '\n'
      << "modes_covered " << modes.modes_covered << " of " << data.mode_centers.size() << '\n'
      << "kl_modes " << fmt_g(modes.kl_to_uniform) << '\n'
      << "unassigned_fraction " << fmt_g(modes.unassigned_fraction) << '\n';
  if (!modes.counts.empty()) {
    out << "counts";
    for (auto c : modes.counts) out << ' ' << c;
    out << '\n';
  }
  RandomSource rng = RandomSource(tc.seed).substream(streams::kEval).substream(0x7E2);
  RandomSource data_rng = rng.substream(1);
  RandomSource check_rng = rng.substream(2);
  const Tensor real = sample_dataset(data, std::max<std::size_t>(tc.eval_samples, 5000), data_rng);
  out << "theorem2_cdf_check " << fmt_g(theorem2_cdf_check(ck.state.models, make_group(tc), real, check_rng))
      << '\n';
  return kExitOk;
}

int cmd_square_fit(const RunConfig& config, std::ostream& out) {
  RandomSource rng = RandomSource(config.train.seed).substream(streams::kEval).substream(0x5F);
  const std::vector<SquareFitRow> rows = square_fitting_table(config.a_grid, config.mc_samples, rng);
  std::filesystem::create_directories(config.out_dir);
  const auto path = config.out_dir / "square_fit.csv";
  std::ofstream csv(path);
  csv << "a,js_two,l_iv_exact,l_iv_mc,mc_stderr\n";
  std::vector<double> as, ls;
  for (const auto& r : rows) {
    csv << join_row({fmt_g(r.a), fmt_g(r.js_two), fmt_g(r.l_iv_exact), fmt_g(r.l_iv_mc), fmt_g(r.mc_stderr)})
        << '\n';
    as.push_back(r.a);
    ls.push_back(r.l_iv_exact);
  }
  csv.close();
  out << "wrote " << path.string() << '\n';
  if (rows.size() >= 2) {
    const LineFit fit = fit_line(as, ls);
    const std::string summary = "slope " + fmt_g(fit.slope) + " intercept " + fmt_g(fit.intercept) +
                                " max_residual " + fmt_g(fit.max_residual) + "\n";
    std::ofstream(config.out_dir / "square_fit_summary.txt") << summary;
    out << summary;
  }
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& config, std::ostream& out) {
  bool ok = true;
  for (const GradCheckRow& r : gradcheck_suite(config.train, config.gradcheck_batch)) {
    const bool pass = r.max_rel_error < kGradCheckTolerance;
    ok = ok && pass;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-13s %-10s max_rel_error %.3e checked %zu excluded %zu %s\n",
                  r.path.c_str(), r.group.c_str(), r.max_rel_error, r.checked, r.excluded,
                  pass ? "ok" : "FAIL");
    out << buf;
  }
  return ok ? kExitOk : kExitAbort;
}

int cmd_invariance(const RunConfig& config, std::ostream& out) {
  bool ok = true;
  for (const InvarianceRow& r : invariance_suite(config)) {
    const bool pass = r.moments_pass && r.energy_p_value >= kInvarianceAlpha;
    ok = ok && pass;
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "intervention %zu max|mean| %.4f max|var-1| %.4f max|cov| %.4f energy_p %.4f %s\n",
                  r.index, r.max_abs_mean, r.max_abs_var_dev, r.max_abs_cov, r.energy_p_value,
                  pass ? "pass" : "fail");
    out << buf;
  }

  // The check must also reject non-invariant inputs.
  const InterventionGroup group = make_group(config.train);
  const std::size_t d = group.latent_dim();
  RandomSource rng = RandomSource(config.train.seed).substream(streams::kEval).substream(0x1A8);
  const std::vector<std::pair<std::string, Sampler>> alternatives = {
      {"N(0,4I)", [d](RandomSource& r, std::size_t n) {
         Tensor t = gaussian(r, {n, d});
         for (double& v : t.data()) v *= 2.0;
         return t;
       }},
      {"N(2*1,I)", [d](RandomSource& r, std::size_t n) {
         Tensor t = gaussian(r, {n, d});
         for (double& v : t.data()) v += 2.0;
         return t;
       }},
  };
  for (std::size_t a = 0; a < alternatives.size(); ++a) {
    RandomSource sub = rng.substream(a);
    const GroupInvarianceReport rep =
        group_invariance_check(group, alternatives[a].second, config.group_n, sub);
    out << "group check on " << alternatives[a].first << ": "
        << (rep.invariant ? "invariant (unexpected)" : "not invariant (expected)") << '\n';
    ok = ok && !rep.invariant;
  }
  return ok ? kExitOk : kExitAbort;
}

}  // namespace ivgan
