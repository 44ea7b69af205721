#include "ivgan/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ivgan/errors.hpp"
#include "ivgan/stats.hpp"

namespace ivgan {

SyntheticDataset SyntheticDataset::grid(std::size_t rows, std::size_t cols, double spacing,
                                        double sigma) {
  if (!(sigma > 0.0) || !(spacing > 0.0) || rows == 0 || cols == 0) {
    throw ContractError("grid dataset needs positive sigma, spacing and extent");
  }
  SyntheticDataset ds{DatasetKind::grid, {}, sigma, 0.0};
  const double r0 = 0.5 * static_cast<double>(rows - 1), c0 = 0.5 * static_cast<double>(cols - 1);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      ds.mode_centers.push_back({(static_cast<double>(c) - c0) * spacing,
                                 (static_cast<double>(r) - r0) * spacing});
  return ds;
}

SyntheticDataset SyntheticDataset::ring(std::size_t modes, double radius, double sigma) {
  if (!(sigma > 0.0) || !(radius > 0.0) || modes == 0) {
    throw ContractError("ring dataset needs positive sigma, radius and mode count");
  }
  SyntheticDataset ds{DatasetKind::ring, {}, sigma, 0.0};
  for (std::size_t m = 0; m < modes; ++m) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(modes);
    ds.mode_centers.push_back({radius * std::cos(theta), radius * std::sin(theta)});
  }
  return ds;
}

SyntheticDataset SyntheticDataset::square_pair(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw ContractError("square_pair offset a must lie in [0, 1]");
  return SyntheticDataset{DatasetKind::square_pair, {}, 1.0, a};
}

Tensor sample_dataset(const SyntheticDataset& ds, std::size_t n, RandomSource& rng) {
  if (n == 0) throw ContractError("sample_dataset needs n >= 1");
  Tensor x({n, 2});
  if (ds.kind == DatasetKind::square_pair) {
    for (std::size_t s = 0; s < n; ++s) {
      x(s, 0) = rng.uniform() - 0.5;
      x(s, 1) = rng.uniform() - 0.5;
    }
    return x;
  }
  for (std::size_t s = 0; s < n; ++s) {
    const Point2& c = ds.mode_centers[rng.uniform_index(ds.mode_centers.size())];
    x(s, 0) = c[0] + ds.component_sigma * rng.normal();
    x(s, 1) = c[1] + ds.component_sigma * rng.normal();
  }
  return x;
}

std::size_t default_min_count(std::size_t samples, std::size_t modes) {
  return std::max<std::size_t>(20, modes ? samples / (100 * modes) : 0);
}

ModeCoverageReport mode_coverage(const Tensor& samples, std::span<const Point2> centers,
                                 double sigma, std::size_t min_count) {
  if (samples.rank() != 2 || samples.dim(0) == 0 || samples.dim(1) != 2) {
    throw ContractError("mode_coverage needs a non-empty n x 2 sample");
  }
  if (centers.empty()) throw ContractError("mode_coverage needs at least one center");
  if (min_count == 0) throw ContractError("min_count must be at least 1");
  const std::size_t n = samples.dim(0), m = centers.size();
  const double radius2 = std::pow(kAssignRadiusSigmas * sigma, 2);

  ModeCoverageReport r;
  r.counts.assign(m, 0);
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < n; ++s) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < m; ++c) {
      const double dx = samples(s, 0) - centers[c][0], dy = samples(s, 1) - centers[c][1];
      const double d2 = dx * dx + dy * dy;
      if (d2 < best) {
        best = d2;
        arg = c;
      }
    }
    if (best <= radius2) {
      ++r.counts[arg];
      ++assigned;
    }
  }
  r.unassigned_fraction = static_cast<double>(n - assigned) / static_cast<double>(n);
  for (auto c : r.counts)
    if (c >= min_count) ++r.modes_covered;
  if (assigned == 0) {
    r.kl_to_uniform = std::log(static_cast<double>(m));
    return r;
  }
  const double total = static_cast<double>(assigned), dm = static_cast<double>(m);
  for (auto c : r.counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    r.kl_to_uniform += p * std::log(p * dm);
  }
  r.kl_to_uniform = std::max(0.0, r.kl_to_uniform);
  return r;
}

std::array<RectUniform, 4> example_squares(double a) {
  return {RectUniform({-0.5, -0.5}, {0.5, 0.5}),        // alpha
          RectUniform({a - 0.5, 0.5}, {a + 0.5, 1.5}),  // beta
          RectUniform({-0.5, 0.5}, {0.5, 1.5}),         // gamma1
          RectUniform({a - 0.5, -0.5}, {a + 0.5, 0.5})};  // gamma2
}

std::vector<SquareFitRow> square_fitting_table(std::span<const double> a_values,
                                               std::size_t mc_samples, RandomSource& rng) {
  std::vector<SquareFitRow> rows;
  for (double a : a_values) {
    if (!(a >= 0.0 && a <= 1.0)) throw ContractError("square-fit offsets must lie in [0, 1]");
    const auto sq = example_squares(a);
    const std::array<RectUniform, 2> pair{sq[0], sq[1]};
    std::vector<PointSampler> samplers;
    std::vector<Density> densities;
    for (const auto& r : sq) {
      samplers.push_back(sampler_for(r));
      densities.push_back(density_for(r));
    }
    const WeightVector uniform4 = WeightVector::uniform(4);
    const McEstimate mc = multi_js_monte_carlo(samplers, densities, uniform4, mc_samples, rng);
    rows.push_back(SquareFitRow{a, multi_js_rect_uniforms(pair, WeightVector::uniform(2)),
                                multi_js_rect_uniforms(sq, uniform4), mc.estimate,
                                mc.std_error});
  }
  return rows;
}

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw ShapeError("fit_line needs >= 2 paired points");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw DomainError("fit_line: all x values coincide");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < xs.size(); ++i)
    f.max_residual = std::max(f.max_residual, std::abs(ys[i] - (f.intercept + f.slope * xs[i])));
  return f;
}

std::vector<std::vector<double>> intervened_roundtrip_ks(const GanModels& models,
                                                         const InterventionGroup& group,
                                                         const Tensor& real, RandomSource& rng) {
  if (real.rank() != 2 || real.dim(0) < 5000) {
    throw ContractError("the roundtrip CDF check needs at least 5000 real samples");
  }
  const Tensor w = encode(models, real);
  std::vector<Tensor> populations;
  for (const auto& spec : group.specs()) {
    populations.push_back(encode(models, generate(models, apply(spec, w, rng))));
  }
  const std::size_t k = group.size(), d = group.latent_dim();
  std::vector<std::vector<double>> ks(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      double worst = 0.0;
      for (std::size_t c = 0; c < d; ++c)
        worst = std::max(worst, ks_distance(column(populations[i], c), column(populations[j], c)));
      ks[i][j] = ks[j][i] = worst;
    }
  return ks;
}

double theorem2_cdf_check(const GanModels& models, const InterventionGroup& group,
                          const Tensor& real, RandomSource& rng) {
  double worst = 0.0;
  for (const auto& row : intervened_roundtrip_ks(models, group, real, rng))
    for (double v : row) worst = std::max(worst, v);
  return worst;
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::grid: return "grid";
    case DatasetKind::ring: return "ring";
    case DatasetKind::square_pair: return "square_pair";
  }
  return "unknown";
}

DatasetKind dataset_from_string(const std::string& name) {
  if (name == "grid") return DatasetKind::grid;
  if (name == "ring") return DatasetKind::ring;
  if (name == "square_pair") return DatasetKind::square_pair;
  throw ContractError("unknown dataset '" + name + "' (expected grid, ring or square_pair)");
}

}  // namespace ivgan
