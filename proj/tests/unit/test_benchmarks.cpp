#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "ivgan/benchmarks.hpp"
#include "ivgan/errors.hpp"

using namespace ivgan;

namespace {

const double kLog2 = std::log(2.0);

Tensor points(const std::vector<Point2>& ps) {
  Tensor t({ps.size(), 2});
  for (std::size_t i = 0; i < ps.size(); ++i) {
    t(i, 0) = ps[i][0];
    t(i, 1) = ps[i][1];
  }
  return t;
}

// KL of a histogram against uniform over m bins, written out directly.
double kl_uniform(const std::vector<std::size_t>& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  double kl = 0.0;
  for (auto c : counts)
    if (c > 0) kl += (c / total) * std::log((c / total) * counts.size());
  return kl;
}

}  // namespace

TEST_CASE("grid samples sit near the lattice with uniform mode frequencies") {
  const auto ds = SyntheticDataset::grid();
  REQUIRE(ds.mode_centers.size() == 25);
  RandomSource rng(5);
  const std::size_t n = 100000;
  const Tensor x = sample_dataset(ds, n, rng);
  std::vector<std::size_t> counts(25, 0);
  std::size_t far = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const double ix = std::clamp(std::round(x(r, 0) / 2.0), -2.0, 2.0);
    const double iy = std::clamp(std::round(x(r, 1) / 2.0), -2.0, 2.0);
    const double dist = std::hypot(x(r, 0) - 2.0 * ix, x(r, 1) - 2.0 * iy);
    if (dist > 4 * 0.05) ++far;
    ++counts[static_cast<std::size_t>((ix + 2) * 5 + (iy + 2))];
  }
  // Rayleigh tail: P(r > 4 sigma) = exp(-8).
  const double expected_far = n * std::exp(-8.0);
  CHECK(std::abs(far - expected_far) < 4 * std::sqrt(expected_far));
  const double p = 1.0 / 25, mean = n * p, sd = std::sqrt(n * p * (1 - p));
  for (auto c : counts) CHECK(std::abs(c - mean) < 4 * sd);
}

TEST_CASE("ring samples stay in the annulus") {
  const auto ds = SyntheticDataset::ring();
  REQUIRE(ds.mode_centers.size() == 8);
  CHECK(std::hypot(ds.mode_centers[3][0], ds.mode_centers[3][1]) == doctest::Approx(2.0));
  RandomSource rng(6);
  const Tensor x = sample_dataset(ds, 100000, rng);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double radius = std::hypot(x(r, 0), x(r, 1));
    CHECK((radius >= 1.9 && radius <= 2.1));
  }
}

TEST_CASE("square_pair samples fill the unit square around the origin") {
  RandomSource rng(7);
  const Tensor x = sample_dataset(SyntheticDataset::square_pair(0.3), 20000, rng);
  double lo = 1, hi = -1;
  for (double v : x.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= -0.5);
  CHECK(hi <= 0.5);
  CHECK(lo < -0.49);
  CHECK(hi > 0.49);
  CHECK_THROWS_AS(SyntheticDataset::square_pair(1.5), ContractError);
  CHECK_THROWS_AS(sample_dataset(SyntheticDataset::grid(), 0, rng), ContractError);
}

TEST_CASE("default min count") {
  CHECK(default_min_count(10000, 25) == 20);
  CHECK(default_min_count(1000000, 25) == 400);
}

TEST_CASE("true grid samples cover every mode") {
  const auto ds = SyntheticDataset::grid();
  RandomSource rng(8);
  const auto rep = mode_coverage(sample_dataset(ds, 10000, rng), ds.mode_centers, 0.05, 20);
  CHECK(rep.modes_covered == 25);
  CHECK(rep.kl_to_uniform < 0.01);
  CHECK(rep.kl_to_uniform == doctest::Approx(kl_uniform(rep.counts)).epsilon(1e-12));
  const std::size_t assigned = std::accumulate(rep.counts.begin(), rep.counts.end(), std::size_t{0});
  CHECK(assigned + rep.unassigned_fraction * 10000 == doctest::Approx(10000));
  // About 1.1% of a 2-D Gaussian lies beyond 3 sigma.
  CHECK(rep.unassigned_fraction == doctest::Approx(std::exp(-4.5)).epsilon(0.2));
}

TEST_CASE("point mass and far-away samples") {
  const auto ds = SyntheticDataset::grid();
  const std::vector<Point2> at_one(500, ds.mode_centers[7]);
  const auto one = mode_coverage(points(at_one), ds.mode_centers, 0.05, 20);
  CHECK(one.modes_covered == 1);
  CHECK(one.counts[7] == 500);
  CHECK(one.kl_to_uniform == doctest::Approx(std::log(25.0)).epsilon(1e-12));
  CHECK(one.unassigned_fraction == 0.0);

  const std::vector<Point2> far(300, Point2{40.0, -40.0});
  const auto none = mode_coverage(points(far), ds.mode_centers, 0.05, 20);
  CHECK(none.modes_covered == 0);
  CHECK(none.unassigned_fraction == 1.0);
  CHECK(none.kl_to_uniform == doctest::Approx(std::log(25.0)));

  CHECK_THROWS_AS(mode_coverage(Tensor({0, 2}), ds.mode_centers, 0.05, 20), ContractError);
}

TEST_CASE("kl is zero exactly for equal counts") {
  const auto ds = SyntheticDataset::ring();
  std::vector<Point2> even, uneven;
  for (std::size_t m = 0; m < 8; ++m)
    for (std::size_t i = 0; i < 30 + (m == 2 ? 1 : 0); ++i) {
      if (i < 30) even.push_back(ds.mode_centers[m]);
      uneven.push_back(ds.mode_centers[m]);
    }
  CHECK(std::abs(mode_coverage(points(even), ds.mode_centers, 0.02, 20).kl_to_uniform) < 1e-15);
  const auto rep = mode_coverage(points(uneven), ds.mode_centers, 0.02, 20);
  CHECK(rep.kl_to_uniform > 0.0);
  CHECK(rep.kl_to_uniform == doctest::Approx(kl_uniform(rep.counts)).epsilon(1e-12));
}

TEST_CASE("mode_coverage is permutation invariant") {
  const auto ds = SyntheticDataset::grid();
  RandomSource rng(9);
  // Skewed sample so the counts differ per mode.
  Tensor x = sample_dataset(ds, 3000, rng);
  for (std::size_t r = 0; r < 1000; ++r) {
    x(r, 0) = ds.mode_centers[r % 3][0];
    x(r, 1) = ds.mode_centers[r % 3][1];
  }
  const auto base = mode_coverage(x, ds.mode_centers, 0.05, 20);

  Tensor shuffled(x.dims());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const std::size_t src = (r * 7 + 11) % x.rows();  // 7 is coprime to 3000
    shuffled(r, 0) = x(src, 0);
    shuffled(r, 1) = x(src, 1);
  }
  std::vector<Point2> centers = ds.mode_centers;
  std::reverse(centers.begin(), centers.end());
  const auto perm = mode_coverage(shuffled, centers, 0.05, 20);
  CHECK(perm.modes_covered == base.modes_covered);
  CHECK(perm.unassigned_fraction == base.unassigned_fraction);
  CHECK(perm.kl_to_uniform == doctest::Approx(base.kl_to_uniform).epsilon(1e-12));
  for (std::size_t m = 0; m < 25; ++m) CHECK(perm.counts[24 - m] == base.counts[m]);
}

TEST_CASE("square fitting table") {
  std::vector<double> as;
  for (int i = 0; i <= 10; ++i) as.push_back(i / 10.0);
  RandomSource rng(10);
  const auto rows = square_fitting_table(as, 20000, rng);
  REQUIRE(rows.size() == 11);
  std::vector<double> l;
  for (const auto& r : rows) {
    CHECK(std::abs(r.js_two - kLog2) < 1e-9);
    // At a = 0 and a = 1 every draw sees the same posterior, so the estimate is exact.
    CHECK(std::abs(r.l_iv_mc - r.l_iv_exact) <= 4 * r.mc_stderr + 1e-12);
    if (r.a > 0.0 && r.a < 1.0) CHECK(r.mc_stderr > 0.0);
    l.push_back(r.l_iv_exact);
  }
  CHECK(std::abs(rows.front().l_iv_exact - kLog2) < 1e-9);
  CHECK(std::abs(rows.back().l_iv_exact - 2 * kLog2) < 1e-9);
  const LineFit fit = fit_line(as, l);
  CHECK(std::abs(fit.slope - kLog2) < 1e-9);
  CHECK(fit.max_residual < 1e-9);
  for (std::size_t i = 1; i < l.size(); ++i) CHECK(l[i] > l[i - 1]);
  const std::vector<double> bad{1.2};
  CHECK_THROWS_AS(square_fitting_table(bad, 1000, rng), ContractError);
}

TEST_CASE("example squares geometry") {
  const auto sq = example_squares(0.25);
  CHECK(sq[0].lower() == Point2{-0.5, -0.5});
  CHECK(sq[0].upper() == Point2{0.5, 0.5});
  CHECK(sq[1].lower() == Point2{-0.25, 0.5});
  CHECK(sq[2].lower() == Point2{-0.5, 0.5});
  CHECK(sq[3].upper() == Point2{0.75, 0.5});
  for (const auto& r : sq) CHECK(r.area() == doctest::Approx(1.0));
}

TEST_CASE("fit_line") {
  const std::vector<double> xs{0, 1, 2, 3}, ys{1, 3, 5, 7};
  const LineFit f = fit_line(xs, ys);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.max_residual < 1e-12);
  const std::vector<double> bent{1, 3, 5, 8};
  CHECK(fit_line(xs, bent).max_residual > 0.1);
  const std::vector<double> same{1, 1};
  CHECK_THROWS_AS(fit_line(same, same), DomainError);
}

TEST_CASE("roundtrip CDF statistic") {
  RandomSource init(12);
  const GanModels m = init_models(2, 8, 4, default_model_specs(2, 8, 4, {16, 16}), init);
  const auto group = InterventionGroup::block_substitution(4, 8);
  RandomSource data(13);
  const Tensor real = sample_dataset(SyntheticDataset::grid(), 5000, data);
  RandomSource a(14), b(14);
  const auto ks = intervened_roundtrip_ks(m, group, real, a);
  REQUIRE(ks.size() == 4);
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(ks[i][i] == 0.0);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(ks[i][j] == ks[j][i]);
      CHECK((ks[i][j] >= 0.0 && ks[i][j] <= 1.0));
      worst = std::max(worst, ks[i][j]);
    }
  }
  const double stat = theorem2_cdf_check(m, group, real, b);
  CHECK(stat == worst);
  MESSAGE("untrained roundtrip statistic: " << stat);
  const Tensor small = sample_dataset(SyntheticDataset::grid(), 100, data);
  CHECK_THROWS_AS(theorem2_cdf_check(m, group, small, b), ContractError);
}

TEST_CASE("dataset names") {
  for (auto k : {DatasetKind::grid, DatasetKind::ring, DatasetKind::square_pair})
    CHECK(dataset_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(dataset_from_string("spiral"), ContractError);
}
