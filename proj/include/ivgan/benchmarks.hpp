#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ivgan/divergence.hpp"
#include "ivgan/interventions.hpp"
#include "ivgan/networks.hpp"
#include "ivgan/random.hpp"

namespace ivgan {

enum class DatasetKind { grid, ring, square_pair };

using Point2 = std::array<double, 2>;

struct SyntheticDataset {
  DatasetKind kind = DatasetKind::grid;
  std::vector<Point2> mode_centers;  // empty for square_pair
  double component_sigma = 0.05;
  double square_a = 0.0;             // square_pair only

  static SyntheticDataset grid(std::size_t rows = 5, std::size_t cols = 5, double spacing = 2.0,
                               double sigma = 0.05);
  static SyntheticDataset ring(std::size_t modes = 8, double radius = 2.0, double sigma = 0.02);
  // Real data of the square-fitting example: uniform on [-1/2, 1/2]^2.
  static SyntheticDataset square_pair(double a);
};

// ring/grid: uniform mode then N(center, sigma^2 I); square_pair: U(alpha).
Tensor sample_dataset(const SyntheticDataset& ds, std::size_t n, RandomSource& rng);

struct ModeCoverageReport {
  std::size_t modes_covered = 0;
  std::vector<std::size_t> counts;
  double kl_to_uniform = 0.0;
  double unassigned_fraction = 0.0;
};

inline constexpr double kAssignRadiusSigmas = 3.0;

// max(20, n / (100 M))
std::size_t default_min_count(std::size_t samples, std::size_t modes);

// Nearest-center assignment within 3 sigma; a mode is covered when it holds
// at least min_count samples. KL is that of the assigned-mode histogram
// against uniform over all M centers; log M when nothing is assigned.
ModeCoverageReport mode_coverage(const Tensor& samples, std::span<const Point2> centers,
                                 double sigma, std::size_t min_count);

// alpha, beta, gamma1, gamma2 of the square-fitting example at offset a.
std::array<RectUniform, 4> example_squares(double a);

struct SquareFitRow {
  double a;
  double js_two;      // JS(U(alpha) || U(beta))
  double l_iv_exact;  // multi-JS of the four squares, uniform weights
  double l_iv_mc;
  double mc_stderr;
};

std::vector<SquareFitRow> square_fitting_table(std::span<const double> a_values,
                                               std::size_t mc_samples, RandomSource& rng);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

// KS sup distance between per-coordinate marginals of E(G(O_i(w))) and
// E(G(O_j(w))), w = E(x), for every pair; entry (i, i) is 0.
std::vector<std::vector<double>> intervened_roundtrip_ks(const GanModels& models,
                                                         const InterventionGroup& group,
                                                         const Tensor& real, RandomSource& rng);

// Max over i < j of the matrix above. Requires at least 5000 real rows.
double theorem2_cdf_check(const GanModels& models, const InterventionGroup& group,
                          const Tensor& real, RandomSource& rng);

std::string to_string(DatasetKind kind);
DatasetKind dataset_from_string(const std::string& name);

}  // namespace ivgan
