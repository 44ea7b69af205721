#include "ivgan/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ivgan/errors.hpp"

namespace ivgan {

namespace {

constexpr double kSumTolerance = 1e-12;

void require_simplex(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw ContractError(std::string(what) + " is empty");
  double total = 0.0;
  for (double p : v) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ContractError(std::string(what) + " has a negative or non-finite entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw ContractError(std::string(what) + " sums to " + std::to_string(total) + ", not 1");
  }
}

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

struct StratumMoments {
  double mean = 0.0;
  double jackknife_var = 0.0;
};

// Delete-one jackknife of a sample mean; for the mean this reduces to the
// usual s^2 / n, but it is computed from the leave-one-out means directly.
StratumMoments jackknife_mean(const std::vector<double>& t) {
  const double n = static_cast<double>(t.size());
  StratumMoments m;
  m.mean = std::accumulate(t.begin(), t.end(), 0.0) / n;
  if (t.size() < 2) return m;
  const double total = m.mean * n;
  double ss = 0.0;
  for (double v : t) {
    const double loo = (total - v) / (n - 1.0);
    ss += (loo - m.mean) * (loo - m.mean);
  }
  m.jackknife_var = (n - 1.0) / n * ss;
  return m;
}

template <typename Term>
McEstimate stratified(std::span<const PointSampler> samplers, std::span<const Density> densities,
                      const std::vector<double>& weights, std::size_t n, RandomSource& rng,
                      Term term) {
  const std::size_t k = samplers.size();
  if (k == 0 || densities.size() != k || weights.size() != k) {
    throw ShapeError("samplers, densities and weights must have equal, nonzero length");
  }
  if (n < 1000) throw ContractError("Monte-Carlo estimators need n >= 1000");
  const std::size_t per = n / k;
  McEstimate est;
  double var = 0.0;
  std::vector<double> dens(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (weights[i] == 0.0) continue;
    const Tensor pts = samplers[i](rng, per);
    const std::size_t dim = pts.cols();
    std::vector<double> terms(per);
    for (std::size_t s = 0; s < per; ++s) {
      std::span<const double> x(pts.data().data() + s * dim, dim);
      for (std::size_t j = 0; j < k; ++j) dens[j] = densities[j](x);
      if (!(dens[i] > 0.0)) {
        throw DomainError("component density is zero at its own sample");
      }
      terms[s] = term(i, dens);
    }
    const StratumMoments m = jackknife_mean(terms);
    est.estimate += weights[i] * m.mean;
    var += weights[i] * weights[i] * m.jackknife_var;
  }
  est.std_error = std::sqrt(var);
  return est;
}

}  // namespace

DiscreteDist::DiscreteDist(std::vector<double> probs) : probs_(std::move(probs)) {
  require_simplex(probs_, "distribution");
}

WeightVector::WeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
  require_simplex(weights_, "weight vector");
}

WeightVector WeightVector::uniform(std::size_t n) {
  return WeightVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

RectUniform::RectUniform(std::array<double, 2> lower, std::array<double, 2> upper)
    : lower_(lower), upper_(upper) {
  if (!(upper_[0] > lower_[0]) || !(upper_[1] > lower_[1])) {
    throw ContractError("rectangle must have positive area");
  }
}

double RectUniform::area() const { return (upper_[0] - lower_[0]) * (upper_[1] - lower_[1]); }

bool RectUniform::contains(double x, double y) const {
  return x >= lower_[0] && x <= upper_[0] && y >= lower_[1] && y <= upper_[1];
}

double entropy(const DiscreteDist& p) {
  double h = 0.0;
  for (double v : p.probs()) h -= xlogx(v);
  return h;
}

double multi_js_discrete(std::span<const DiscreteDist> ps, const WeightVector& w) {
  if (ps.empty() || ps.size() != w.size()) {
    throw ShapeError("need one weight per distribution");
  }
  const std::size_t support = ps.front().size();
  std::vector<double> mix(support, 0.0);
  double mean_entropy = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i].size() != support) throw ShapeError("distributions have different supports");
    for (std::size_t s = 0; s < support; ++s) mix[s] += w[i] * ps[i][s];
    mean_entropy += w[i] * entropy(ps[i]);
  }
  double h_mix = 0.0;
  for (double m : mix) h_mix -= xlogx(m);
  // JS lies in [0, H(w)]; clamp rounding noise at the extremes.
  double h_w = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) h_w -= xlogx(w[i]);
  return std::clamp(h_mix - mean_entropy, 0.0, h_w);
}

double multi_js_rect_uniforms(std::span<const RectUniform> rects, const WeightVector& w) {
  if (rects.empty() || rects.size() != w.size()) {
    throw ShapeError("need one weight per rectangle");
  }
  std::vector<double> xs, ys;
  for (const auto& r : rects) {
    xs.push_back(r.lower()[0]);
    xs.push_back(r.upper()[0]);
    ys.push_back(r.lower()[1]);
    ys.push_back(r.upper()[1]);
  }
  auto uniq = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniq(xs);
  uniq(ys);

  double h_mix = 0.0;
  for (std::size_t a = 0; a + 1 < xs.size(); ++a) {
    const double cx = 0.5 * (xs[a] + xs[a + 1]);
    for (std::size_t b = 0; b + 1 < ys.size(); ++b) {
      const double cy = 0.5 * (ys[b] + ys[b + 1]);
      double m = 0.0;
      for (std::size_t i = 0; i < rects.size(); ++i) m += w[i] * rects[i].density(cx, cy);
      if (m > 0.0) h_mix -= m * std::log(m) * (xs[a + 1] - xs[a]) * (ys[b + 1] - ys[b]);
    }
  }
  double mean_entropy = 0.0;
  for (std::size_t i = 0; i < rects.size(); ++i) mean_entropy += w[i] * std::log(rects[i].area());
  return h_mix - mean_entropy;
}

PointSampler sampler_for(const RectUniform& r) {
  return [r](RandomSource& rng, std::size_t n) {
    Tensor pts({n, 2});
    for (std::size_t s = 0; s < n; ++s) {
      pts(s, 0) = r.lower()[0] + (r.upper()[0] - r.lower()[0]) * rng.uniform();
      pts(s, 1) = r.lower()[1] + (r.upper()[1] - r.lower()[1]) * rng.uniform();
    }
    return pts;
  };
}

Density density_for(const RectUniform& r) {
  return [r](std::span<const double> x) { return r.density(x[0], x[1]); };
}

McEstimate multi_js_monte_carlo(std::span<const PointSampler> samplers,
                                std::span<const Density> densities, const WeightVector& w,
                                std::size_t n, RandomSource& rng) {
  const std::vector<double>& pi = w.weights();
  return stratified(samplers, densities, pi, n, rng,
                    [&pi](std::size_t i, const std::vector<double>& dens) {
                      double m = 0.0;
                      for (std::size_t j = 0; j < dens.size(); ++j) m += pi[j] * dens[j];
                      return std::log(dens[i]) - std::log(m);
                    });
}

std::vector<double> optimal_classifier_posterior(std::span<const double> density_values) {
  double total = 0.0;
  for (double v : density_values) {
    if (!(v >= 0.0)) throw DomainError("negative density value");
    total += v;
  }
  if (!(total > 0.0)) throw DomainError("all component densities are zero at this point");
  std::vector<double> post(density_values.begin(), density_values.end());
  for (double& v : post) v /= total;
  return post;
}

std::vector<double> optimal_classifier_posterior(std::span<const Density> densities,
                                                 std::span<const double> x) {
  std::vector<double> vals;
  vals.reserve(densities.size());
  for (const auto& d : densities) vals.push_back(d(x));
  return optimal_classifier_posterior(vals);
}

McEstimate cross_entropy_at_optimum(std::span<const PointSampler> samplers,
                                    std::span<const Density> densities, std::size_t n,
                                    RandomSource& rng) {
  const std::vector<double> pi = WeightVector::uniform(samplers.size()).weights();
  return stratified(samplers, densities, pi, n, rng,
                    [](std::size_t i, const std::vector<double>& dens) {
                      const double total = std::accumulate(dens.begin(), dens.end(), 0.0);
                      return -std::log(dens[i] / total);
                    });
}

double cross_entropy_at_optimum(std::span<const DiscreteDist> ps) {
  if (ps.empty()) throw ShapeError("no distributions");
  const std::size_t k = ps.size(), support = ps.front().size();
  double v = 0.0;
  for (std::size_t s = 0; s < support; ++s) {
    double total = 0.0;
    for (const auto& p : ps) {
      if (p.size() != support) throw ShapeError("distributions have different supports");
      total += p[s];
    }
    for (const auto& p : ps) {
      if (p[s] > 0.0) v -= p[s] * std::log(p[s] / total);
    }
  }
  return v / static_cast<double>(k);
}

}  // namespace ivgan
