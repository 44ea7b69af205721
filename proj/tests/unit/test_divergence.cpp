#include <array>
#include <cmath>

#include "doctest.h"
#include "ivgan/benchmarks.hpp"
#include "ivgan/divergence.hpp"
#include "ivgan/errors.hpp"

using namespace ivgan;

namespace {

const double kLog2 = std::log(2.0);

// Two-component JS with equal weights by midpoint quadrature on a grid of
// the given step over the bounding box of both rectangles.
double js_by_quadrature(const RectUniform& p, const RectUniform& q, double step) {
  const double x0 = std::min(p.lower()[0], q.lower()[0]), x1 = std::max(p.upper()[0], q.upper()[0]);
  const double y0 = std::min(p.lower()[1], q.lower()[1]), y1 = std::max(p.upper()[1], q.upper()[1]);
  const auto nx = static_cast<std::size_t>(std::llround((x1 - x0) / step));
  const auto ny = static_cast<std::size_t>(std::llround((y1 - y0) / step));
  double total = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = x0 + (static_cast<double>(i) + 0.5) * step;
    for (std::size_t j = 0; j < ny; ++j) {
      const double y = y0 + (static_cast<double>(j) + 0.5) * step;
      const double a = p.density(x, y), b = q.density(x, y), m = 0.5 * (a + b);
      if (a > 0) total += 0.5 * a * std::log(a / m);
      if (b > 0) total += 0.5 * b * std::log(b / m);
    }
  }
  return total * step * step;
}

std::vector<PointSampler> samplers_of(std::span<const RectUniform> rs) {
  std::vector<PointSampler> out;
  for (const auto& r : rs) out.push_back(sampler_for(r));
  return out;
}

std::vector<Density> densities_of(std::span<const RectUniform> rs) {
  std::vector<Density> out;
  for (const auto& r : rs) out.push_back(density_for(r));
  return out;
}

}  // namespace

TEST_CASE("distribution validation") {
  CHECK_THROWS(DiscreteDist({0.5, 0.6}));
  CHECK_THROWS(DiscreteDist({-0.1, 1.1}));
  CHECK_THROWS(WeightVector({0.3, 0.3}));
  CHECK_NOTHROW(DiscreteDist({0.5, 0.5 + 1e-13}));
  CHECK_THROWS(RectUniform({0, 0}, {0, 1}));
}

TEST_CASE("entropy examples") {
  CHECK(entropy(DiscreteDist({1, 0})) == 0.0);
  CHECK(entropy(DiscreteDist({0.5, 0.5})) == doctest::Approx(kLog2).epsilon(1e-15));
  CHECK(entropy(DiscreteDist({0.25, 0.25, 0.25, 0.25})) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
}

TEST_CASE("multi_js_discrete examples") {
  const DiscreteDist p({0.2, 0.3, 0.5});
  const std::vector<DiscreteDist> same = {p, p, p};
  CHECK(multi_js_discrete(same, WeightVector({0.1, 0.6, 0.3})) == doctest::Approx(0.0).epsilon(1e-15));
  const std::vector<DiscreteDist> disjoint = {DiscreteDist({1, 0}), DiscreteDist({0, 1})};
  CHECK(multi_js_discrete(disjoint, WeightVector::uniform(2)) == doctest::Approx(kLog2).epsilon(1e-15));
  const std::vector<DiscreteDist> three = {DiscreteDist({1, 0}), DiscreteDist({0, 1}),
                                           DiscreteDist({0.5, 0.5})};
  CHECK(multi_js_discrete(three, WeightVector::uniform(3)) == doctest::Approx(2.0 / 3.0 * kLog2).epsilon(1e-14));
  const std::vector<DiscreteDist> mismatch = {DiscreteDist({1, 0}), DiscreteDist({0, 0, 1})};
  CHECK_THROWS_AS(multi_js_discrete(mismatch, WeightVector::uniform(2)), ShapeError);
  CHECK_THROWS_AS(multi_js_discrete(disjoint, WeightVector::uniform(3)), ShapeError);
}

TEST_CASE("multi_js_discrete bounds on random cases") {
  RandomSource rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(5), s = 2 + rng.uniform_index(8);
    std::vector<DiscreteDist> ps;
    std::vector<double> raw_w(k);
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<double> v(s);
      double z = 0;
      for (double& x : v) z += (x = rng.uniform() + 1e-3);
      for (double& x : v) x /= z;
      ps.emplace_back(v);
    }
    double wz = 0;
    for (double& w : raw_w) wz += (w = rng.uniform() + 1e-3);
    for (double& w : raw_w) w /= wz;
    const WeightVector w(raw_w);
    const double js = multi_js_discrete(ps, w);
    double hw = 0;
    for (double x : raw_w) hw -= x * std::log(x);
    CHECK(js > 0.0);
    CHECK(js <= hw + 1e-12);
  }
}

TEST_CASE("rectangle arrangement examples") {
  const RectUniform unit({0, 0}, {1, 1});
  const std::array<RectUniform, 2> same{unit, unit};
  CHECK(multi_js_rect_uniforms(same, WeightVector::uniform(2)) == doctest::Approx(0.0).epsilon(1e-15));
  const std::array<RectUniform, 2> apart{unit, RectUniform({3, 0}, {4, 1})};
  CHECK(multi_js_rect_uniforms(apart, WeightVector::uniform(2)) == doctest::Approx(kLog2).epsilon(1e-14));
  CHECK(multi_js_rect_uniforms(example_squares(0.0), WeightVector::uniform(4)) ==
        doctest::Approx(kLog2).epsilon(1e-14));
  CHECK(multi_js_rect_uniforms(example_squares(1.0), WeightVector::uniform(4)) ==
        doctest::Approx(2 * kLog2).epsilon(1e-14));
}

TEST_CASE("rectangle arrangement agrees with quadrature") {
  const std::vector<std::pair<RectUniform, RectUniform>> cases = {
      {RectUniform({0, 0}, {1, 1}), RectUniform({0.5, 0.25}, {1.5, 1.25})},
      {RectUniform({0, 0}, {2, 0.5}), RectUniform({0.3, 0.1}, {0.8, 1.1})},
      {RectUniform({-0.5, -0.5}, {0.5, 0.5}), RectUniform({-0.2, 0.5}, {0.8, 1.5})},
  };
  for (const auto& [p, q] : cases) {
    const std::array<RectUniform, 2> rs{p, q};
    CHECK(std::abs(multi_js_rect_uniforms(rs, WeightVector::uniform(2)) - js_by_quadrature(p, q, 1e-3)) <
          1e-6);
  }
}

TEST_CASE("four squares are affine in a with slope log 2") {
  for (int i = 0; i <= 10; ++i) {
    const double a = i / 10.0;
    // overlap 2(1-a) at mixture density 1/2, the rest at 1/4
    CHECK(multi_js_rect_uniforms(example_squares(a), WeightVector::uniform(4)) ==
          doctest::Approx((1.0 + a) * kLog2).epsilon(1e-13));
    const auto sq = example_squares(a);
    const std::array<RectUniform, 2> pair{sq[0], sq[1]};
    CHECK(std::abs(multi_js_rect_uniforms(pair, WeightVector::uniform(2)) - kLog2) < 1e-12);
  }
}

TEST_CASE("monte carlo multi-JS") {
  RandomSource rng(41);
  const RectUniform unit({0, 0}, {1, 1});
  {
    const std::array<RectUniform, 3> same{unit, unit, unit};
    const McEstimate e = multi_js_monte_carlo(samplers_of(same), densities_of(same),
                                              WeightVector::uniform(3), 3000, rng);
    CHECK(std::abs(e.estimate) <= 3 * e.std_error + 1e-12);
  }
  {
    const auto sq = example_squares(0.5);
    const double exact = multi_js_rect_uniforms(sq, WeightVector::uniform(4));
    const McEstimate e =
        multi_js_monte_carlo(samplers_of(sq), densities_of(sq), WeightVector::uniform(4), 200000, rng);
    CHECK(std::abs(e.estimate - exact) < 0.01 * exact);
    CHECK(e.std_error > 0.0);
  }
  {
    const std::array<RectUniform, 2> apart{unit, RectUniform({2, 2}, {3, 3})};
    const McEstimate e = multi_js_monte_carlo(samplers_of(apart), densities_of(apart),
                                              WeightVector::uniform(2), 200000, rng);
    CHECK(std::abs(e.estimate - kLog2) < 0.01 * kLog2);
  }
  {
    const std::array<RectUniform, 2> rs{unit, unit};
    std::vector<Density> bad = {density_for(unit), [](std::span<const double>) { return 0.0; }};
    CHECK_THROWS_AS(multi_js_monte_carlo(samplers_of(rs), bad, WeightVector::uniform(2), 2000, rng),
                    DomainError);
    CHECK_THROWS(multi_js_monte_carlo(samplers_of(rs), densities_of(rs), WeightVector::uniform(2), 999, rng));
  }
}

TEST_CASE("optimal classifier posterior") {
  const std::vector<double> a = {0.2, 0.6, 0.2};
  const auto pa = optimal_classifier_posterior(a);
  for (std::size_t i = 0; i < 3; ++i) CHECK(pa[i] == doctest::Approx(a[i]).epsilon(1e-15));
  const auto pe = optimal_classifier_posterior(std::vector<double>{3, 3, 3, 3});
  for (double v : pe) CHECK(v == 0.25);
  const auto po = optimal_classifier_posterior(std::vector<double>{0, 5, 0});
  CHECK(po == std::vector<double>{0, 1, 0});
  CHECK_THROWS_AS(optimal_classifier_posterior(std::vector<double>{0, 0}), DomainError);

  const auto sq = example_squares(0.5);
  const auto ds = densities_of(sq);
  const std::array<double, 2> x{0.2, 0.0};  // alpha and gamma2 overlap here
  const auto p = optimal_classifier_posterior(ds, x);
  CHECK(p[0] == 0.5);
  CHECK(p[3] == 0.5);
  const std::array<double, 2> nowhere{10.0, 10.0};
  CHECK_THROWS_AS(optimal_classifier_posterior(ds, nowhere), DomainError);
}

TEST_CASE("cross entropy at the optimum") {
  RandomSource rng(43);
  const RectUniform unit({0, 0}, {1, 1});
  {
    const std::array<RectUniform, 4> same{unit, unit, unit, unit};
    const McEstimate e = cross_entropy_at_optimum(samplers_of(same), densities_of(same), 4000, rng);
    CHECK(e.estimate == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  }
  {
    const std::array<RectUniform, 2> apart{unit, RectUniform({2, 0}, {3, 1})};
    const McEstimate e = cross_entropy_at_optimum(samplers_of(apart), densities_of(apart), 4000, rng);
    CHECK(std::abs(e.estimate) < 1e-12);
  }
  {
    const auto sq = example_squares(0.5);
    const McEstimate ce = cross_entropy_at_optimum(samplers_of(sq), densities_of(sq), 200000, rng);
    const double target = std::log(4.0) - multi_js_rect_uniforms(sq, WeightVector::uniform(4));
    CHECK(std::abs(ce.estimate - target) <= 3 * ce.std_error + 1e-12);

    RandomSource again(44);
    const McEstimate js =
        multi_js_monte_carlo(samplers_of(sq), densities_of(sq), WeightVector::uniform(4), 200000, again);
    const double combined = std::sqrt(ce.std_error * ce.std_error + js.std_error * js.std_error);
    CHECK(std::abs(ce.estimate + js.estimate - std::log(4.0)) <= 3 * combined + 1e-12);
  }
  {
    const std::vector<DiscreteDist> ps = {DiscreteDist({0.5, 0.5, 0, 0}), DiscreteDist({0, 0.5, 0.5, 0}),
                                          DiscreteDist({0.1, 0.2, 0.3, 0.4})};
    CHECK(cross_entropy_at_optimum(ps) ==
          doctest::Approx(std::log(3.0) - multi_js_discrete(ps, WeightVector::uniform(3))).epsilon(1e-13));
  }
}
