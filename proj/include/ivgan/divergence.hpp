#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ivgan/random.hpp"
#include "ivgan/tensor.hpp"

namespace ivgan {

// Probability vector; entries nonnegative and summing to 1 within 1e-12.
class DiscreteDist {
 public:
  explicit DiscreteDist(std::vector<double> probs);
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  std::vector<double> probs_;
};

// Mixture weights pi_1..pi_n; nonnegative, summing to 1 within 1e-12.
class WeightVector {
 public:
  explicit WeightVector(std::vector<double> weights);
  static WeightVector uniform(std::size_t n);
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }

 private:
  std::vector<double> weights_;
};

// Uniform density on the axis-aligned rectangle [lower, upper].
class RectUniform {
 public:
  RectUniform(std::array<double, 2> lower, std::array<double, 2> upper);

  const std::array<double, 2>& lower() const { return lower_; }
  const std::array<double, 2>& upper() const { return upper_; }
  double area() const;
  bool contains(double x, double y) const;
  double density(double x, double y) const { return contains(x, y) ? 1.0 / area() : 0.0; }

 private:
  std::array<double, 2> lower_;
  std::array<double, 2> upper_;
};

// Entropy in nats with 0 log 0 = 0.
double entropy(const DiscreteDist& p);

// H(sum pi_i p_i) - sum pi_i H(p_i).
double multi_js_discrete(std::span<const DiscreteDist> ps, const WeightVector& w);

// Exact multi-JS of rectangle uniforms by sweeping the grid of breakpoints:
// the mixture density is constant on every cell.
double multi_js_rect_uniforms(std::span<const RectUniform> rects, const WeightVector& w);

// Draws n points as an n x dim matrix.
using PointSampler = std::function<Tensor(RandomSource&, std::size_t)>;
using Density = std::function<double(std::span<const double>)>;

PointSampler sampler_for(const RectUniform& r);
Density density_for(const RectUniform& r);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Stratified estimator: n / k draws from each component, each contributing
// log p_i(x) - log sum_j pi_j p_j(x). Standard error by delete-one jackknife.
McEstimate multi_js_monte_carlo(std::span<const PointSampler> samplers,
                                std::span<const Density> densities, const WeightVector& w,
                                std::size_t n, RandomSource& rng);

// f*_i(x) = p_i(x) / sum_j p_j(x).
std::vector<double> optimal_classifier_posterior(std::span<const double> density_values);
std::vector<double> optimal_classifier_posterior(std::span<const Density> densities,
                                                 std::span<const double> x);

// Monte-Carlo V_class(f*) under i ~ U([k]); equals log k - JS(p_1..p_k).
McEstimate cross_entropy_at_optimum(std::span<const PointSampler> samplers,
                                    std::span<const Density> densities, std::size_t n,
                                    RandomSource& rng);

// Exact V_class(f*) for discrete components under uniform weights.
double cross_entropy_at_optimum(std::span<const DiscreteDist> ps);

}  // namespace ivgan
