#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ivgan {

using Dims = std::vector<std::size_t>;

// Dense row-major array of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Dims dims, double fill = 0.0);
  Tensor(Dims dims, std::vector<double> data);

  static Tensor zeros(Dims dims) { return Tensor(std::move(dims)); }
  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor vector(std::vector<double> v);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor identity(std::size_t n);

  const Dims& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Matrix view helpers. A rank-1 tensor is treated as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> data() & { return data_; }
  std::span<const double> data() const& { return data_; }
  std::span<const double> data() && = delete;  // would dangle
  const std::vector<double>& values() const& { return data_; }
  std::vector<double> values() && { return std::move(data_); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  // Scalar value of a single-element tensor.
  double item() const;

  bool same_dims(const Tensor& other) const { return dims_ == other.dims_; }
  bool all_finite() const;

  // Copy of row r as a 1 x cols tensor.
  Tensor row(std::size_t r) const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Dims dims_;
  std::vector<double> data_;
};

std::size_t element_count(const Dims& dims);
std::string dims_to_string(const Dims& dims);

}  // namespace ivgan
