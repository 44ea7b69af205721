#include "ivgan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ivgan/errors.hpp"

namespace ivgan {

namespace {

void require_comparable(const Tensor& x, const Tensor& y) {
  if (x.rank() != 2 || y.rank() != 2 || x.dim(1) != y.dim(1)) {
    throw ShapeError("two-sample inputs must be matrices with equal column counts");
  }
  if (x.dim(0) == 0 || y.dim(0) == 0) throw ContractError("two-sample inputs must be non-empty");
}

// Pairwise Euclidean distances between the rows of [x; y].
std::vector<double> pooled_distances(const Tensor& x, const Tensor& y) {
  const std::size_t n = x.dim(0), m = y.dim(0), d = x.dim(1), total = n + m;
  auto row = [&](std::size_t i) {
    return i < n ? x.data().data() + i * d : y.data().data() + (i - n) * d;
  };
  std::vector<double> dist(total * total, 0.0);
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = i + 1; j < total; ++j) {
      const double* a = row(i);
      const double* b = row(j);
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
      dist[i * total + j] = dist[j * total + i] = std::sqrt(s);
    }
  }
  return dist;
}

double energy_from_labels(const std::vector<double>& dist, const std::vector<char>& in_x,
                          std::size_t n, std::size_t m) {
  const std::size_t total = n + m;
  double xx = 0.0, yy = 0.0, xy = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const double* drow = dist.data() + i * total;
    for (std::size_t j = i + 1; j < total; ++j) {
      if (in_x[i] && in_x[j]) {
        xx += drow[j];
      } else if (!in_x[i] && !in_x[j]) {
        yy += drow[j];
      } else {
        xy += drow[j];
      }
    }
  }
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return 2.0 * xy / (dn * dm) - 2.0 * xx / (dn * dn) - 2.0 * yy / (dm * dm);
}

}  // namespace

double energy_distance(const Tensor& x, const Tensor& y) {
  require_comparable(x, y);
  const std::size_t n = x.dim(0), m = y.dim(0);
  std::vector<char> in_x(n + m, 0);
  std::fill(in_x.begin(), in_x.begin() + static_cast<std::ptrdiff_t>(n), 1);
  return energy_from_labels(pooled_distances(x, y), in_x, n, m);
}

TwoSampleTest energy_test(const Tensor& x, const Tensor& y, std::size_t permutations,
                          RandomSource& rng) {
  require_comparable(x, y);
  const std::size_t n = x.dim(0), m = y.dim(0), total = n + m;
  const std::vector<double> dist = pooled_distances(x, y);
  std::vector<char> labels(total, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n), 1);

  TwoSampleTest result;
  result.statistic = energy_from_labels(dist, labels, n, m);
  std::size_t at_least = 0;
  for (std::size_t p = 0; p < permutations; ++p) {
    // Fisher-Yates with the library's own generator for reproducibility.
    for (std::size_t i = total - 1; i > 0; --i) {
      std::swap(labels[i], labels[rng.uniform_index(i + 1)]);
    }
    if (energy_from_labels(dist, labels, n, m) >= result.statistic) ++at_least;
  }
  result.p_value =
      static_cast<double>(1 + at_least) / static_cast<double>(1 + permutations);
  return result;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ContractError("ks_distance on an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

std::vector<double> column(const Tensor& m, std::size_t c) {
  std::vector<double> out(m.rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = m(r, c);
  return out;
}

}  // namespace ivgan
