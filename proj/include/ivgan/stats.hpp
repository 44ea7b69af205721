#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ivgan/random.hpp"
#include "ivgan/tensor.hpp"

namespace ivgan {

// Energy distance 2E|X-Y| - E|X-X'| - E|Y-Y'| between the row sets of two
// n x d and m x d samples (V-statistic form).
double energy_distance(const Tensor& x, const Tensor& y);

struct TwoSampleTest {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Permutation test of equal distributions using the energy distance.
TwoSampleTest energy_test(const Tensor& x, const Tensor& y, std::size_t permutations,
                          RandomSource& rng);

// Two-sample Kolmogorov-Smirnov distance sup_t |F_a(t) - F_b(t)|.
double ks_distance(std::vector<double> a, std::vector<double> b);

// Column c of an n x d matrix.
std::vector<double> column(const Tensor& m, std::size_t c);

}  // namespace ivgan
