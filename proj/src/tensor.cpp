#include "ivgan/tensor.hpp"

#include <cmath>
#include <sstream>

#include "ivgan/errors.hpp"

namespace ivgan {

std::size_t element_count(const Dims& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::string dims_to_string(const Dims& dims) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << 'x';
    os << dims[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor(Dims dims, double fill)
    : dims_(std::move(dims)), data_(element_count(dims_), fill) {}

Tensor::Tensor(Dims dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (data_.size() != element_count(dims_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match dims " + dims_to_string(dims_));
  }
}

Tensor Tensor::vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

std::size_t Tensor::rows() const {
  if (dims_.size() == 2) return dims_[0];
  if (dims_.size() == 1) return 1;
  throw ShapeError("matrix view requires rank 1 or 2, got " + dims_to_string(dims_));
}

std::size_t Tensor::cols() const {
  if (dims_.size() == 2) return dims_[1];
  if (dims_.size() == 1) return dims_[0];
  throw ShapeError("matrix view requires rank 1 or 2, got " + dims_to_string(dims_));
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw ContractError("item() on tensor with dims " + dims_to_string(dims_));
  }
  return data_[0];
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(r * c),
                          data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * c));
  return Tensor({1, c}, std::move(out));
}

}  // namespace ivgan
