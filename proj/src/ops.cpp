#include "ivgan/ops.hpp"

#include <algorithm>
#include <cmath>

#include <cblas.h>

#include "ivgan/errors.hpp"

namespace ivgan {

namespace {

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got dims " +
                     dims_to_string(t.dims()));
  }
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_dims(b)) {
    throw ShapeError(std::string(op) + ": dims " + dims_to_string(a.dims()) + " vs " +
                     dims_to_string(b.dims()));
  }
}

int blas_int(std::size_t n) { return static_cast<int>(std::max<std::size_t>(n, 1)); }

// c[m x n] += a[m x k] * b[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  if (m == 0 || n == 0 || k == 0) return;
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, blas_int(m), blas_int(n), blas_int(k), 1.0,
              a, blas_int(k), b, blas_int(n), 1.0, c, blas_int(n));
}

// c[m x k] += g[m x n] * b[k x n]^T
void gemm_nt(const double* g, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
  if (m == 0 || n == 0 || k == 0) return;
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, blas_int(m), blas_int(k), blas_int(n), 1.0,
              g, blas_int(n), b, blas_int(n), 1.0, c, blas_int(k));
}

// c[k x n] += a[m x k]^T * g[m x n]
void gemm_tn(const double* a, const double* g, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  if (m == 0 || n == 0 || k == 0) return;
  cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, blas_int(k), blas_int(n), blas_int(m), 1.0,
              a, blas_int(k), g, blas_int(n), 1.0, c, blas_int(n));
}

template <typename Fwd, typename Deriv>
Var unary(Var x, Fwd fwd, Deriv deriv) {
  const Tensor& xv = x.value();
  Tensor out(xv.dims());
  auto xs = xv.data();
  auto os = out.data();
  for (std::size_t i = 0; i < xs.size(); ++i) os[i] = fwd(xs[i]);
  return x.tape().record(std::move(out), {x.id()}, [deriv](const BackwardArgs& a) {
    auto xs = a.in_values[0]->data();
    auto ys = a.out_value.data();
    auto g = a.grad_out.data();
    auto gx = a.in_grads[0]->data();
    for (std::size_t i = 0; i < xs.size(); ++i) gx[i] += g[i] * deriv(xs[i], ys[i]);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: inner dims disagree " + dims_to_string(a.dims()) + " x " +
                     dims_to_string(b.dims()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  gemm_nn(a.data().data(), b.data().data(), c.data().data(), m, k, n);
  return c;
}

Var matmul(Var a, Var b) {
  Tensor out = matmul(a.value(), b.value());
  return a.tape().record(std::move(out), {a.id(), b.id()}, [](const BackwardArgs& args) {
    const Tensor& av = *args.in_values[0];
    const Tensor& bv = *args.in_values[1];
    const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
    const double* g = args.grad_out.data().data();
    if (Tensor* ga = args.in_grads[0]) gemm_nt(g, bv.data().data(), ga->data().data(), m, n, k);
    if (Tensor* gb = args.in_grads[1]) gemm_tn(av.data().data(), g, gb->data().data(), m, k, n);
  });
}

Var add(Var a, Var b) {
  require_same(a.value(), b.value(), "add");
  Tensor out = a.value();
  auto bs = b.value().data();
  auto os = out.data();
  for (std::size_t i = 0; i < os.size(); ++i) os[i] += bs[i];
  return a.tape().record(std::move(out), {a.id(), b.id()}, [](const BackwardArgs& args) {
    auto g = args.grad_out.data();
    for (Tensor* gi : args.in_grads) {
      if (!gi) continue;
      auto d = gi->data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
    }
  });
}

Var sub(Var a, Var b) {
  require_same(a.value(), b.value(), "sub");
  Tensor out = a.value();
  auto bs = b.value().data();
  auto os = out.data();
  for (std::size_t i = 0; i < os.size(); ++i) os[i] -= bs[i];
  return a.tape().record(std::move(out), {a.id(), b.id()}, [](const BackwardArgs& args) {
    auto g = args.grad_out.data();
    if (Tensor* ga = args.in_grads[0]) {
      auto d = ga->data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
    }
    if (Tensor* gb = args.in_grads[1]) {
      auto d = gb->data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same(a.value(), b.value(), "mul");
  Tensor out = a.value();
  auto bs = b.value().data();
  auto os = out.data();
  for (std::size_t i = 0; i < os.size(); ++i) os[i] *= bs[i];
  return a.tape().record(std::move(out), {a.id(), b.id()}, [](const BackwardArgs& args) {
    auto g = args.grad_out.data();
    auto av = args.in_values[0]->data();
    auto bv = args.in_values[1]->data();
    if (Tensor* ga = args.in_grads[0]) {
      auto d = ga->data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * bv[i];
    }
    if (Tensor* gb = args.in_grads[1]) {
      auto d = gb->data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * av[i];
    }
  });
}

Var neg(Var x) {
  return unary(x, [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Var abs(Var x) {
  x.tape().note_kinks(x.value().data());
  return unary(
      x, [](double v) { return std::abs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Var relu(Var x) {
  x.tape().note_kinks(x.value().data());
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(Var x, double slope) {
  x.tape().note_kinks(x.value().data());
  return unary(
      x, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Var tanh(Var x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var x) {
  return unary(
      x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var log_sigmoid(Var x) {
  // log sigma(v) = -(max(-v, 0) + log1p(exp(-|v|))); derivative sigma(-v).
  return unary(
      x, [](double v) { return -(std::max(-v, 0.0) + std::log1p(std::exp(-std::abs(v)))); },
      [](double v, double) {
        if (v >= 0.0) {
          const double e = std::exp(-v);
          return e / (1.0 + e);
        }
        return 1.0 / (1.0 + std::exp(v));
      });
}

Var log(Var x) {
  for (double v : x.value().data()) {
    if (!(v > 0.0)) throw DomainError("log of non-positive value " + std::to_string(v));
  }
  return unary(
      x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Var exp(Var x) {
  return unary(
      x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Var square(Var x) {
  return unary(
      x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Var scale(Var x, double factor) {
  return unary(
      x, [factor](double v) { return factor * v; }, [factor](double, double) { return factor; });
}

Var add_scalar(Var x, double offset) {
  return unary(
      x, [offset](double v) { return v + offset; }, [](double, double) { return 1.0; });
}

Var clamp_min(Var x, double floor) {
  return unary(
      x, [floor](double v) { return v > floor ? v : floor; },
      [floor](double v, double) { return v > floor ? 1.0 : 0.0; });
}

Var add_row(Var x, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  require_matrix(xv, "add_row");
  const std::size_t n = xv.dim(0), c = xv.dim(1);
  if (bv.size() != c || bv.rows() != 1) {
    throw ShapeError("add_row: bias dims " + dims_to_string(bv.dims()) + " vs matrix " +
                     dims_to_string(xv.dims()));
  }
  Tensor out = xv;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < c; ++j) out(r, j) += bv[j];
  return x.tape().record(std::move(out), {x.id(), bias.id()}, [n, c](const BackwardArgs& a) {
    auto g = a.grad_out.data();
    if (Tensor* gx = a.in_grads[0]) {
      auto d = gx->data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
    }
    if (Tensor* gb = a.in_grads[1]) {
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < c; ++j) (*gb)[j] += g[r * c + j];
    }
  });
}

namespace {

struct AxisSplit {
  std::size_t outer, extent, inner;
  Dims out_dims;
};

AxisSplit split_axis(const Dims& dims, std::size_t axis) {
  if (axis >= dims.size()) {
    throw ShapeError("reduction axis " + std::to_string(axis) + " out of range for dims " +
                     dims_to_string(dims));
  }
  AxisSplit s{1, dims[axis], 1, {}};
  for (std::size_t i = 0; i < axis; ++i) s.outer *= dims[i];
  for (std::size_t i = axis + 1; i < dims.size(); ++i) s.inner *= dims[i];
  for (std::size_t i = 0; i < dims.size(); ++i)
    if (i != axis) s.out_dims.push_back(dims[i]);
  if (s.out_dims.empty()) s.out_dims.push_back(1);
  return s;
}

Var reduce(Var x, std::optional<std::size_t> axis, bool average) {
  const Tensor& xv = x.value();
  if (!axis) {
    double acc = 0.0;
    for (double v : xv.data()) acc += v;
    const double n = static_cast<double>(xv.size());
    const double factor = average ? (n > 0 ? 1.0 / n : 0.0) : 1.0;
    if (average && n > 0) acc /= n;
    return x.tape().record(Tensor::scalar(acc), {x.id()}, [factor](const BackwardArgs& a) {
      const double g = a.grad_out[0] * factor;
      for (double& d : a.in_grads[0]->data()) d += g;
    });
  }
  const AxisSplit s = split_axis(xv.dims(), *axis);
  Tensor out(s.out_dims);
  const double factor = average && s.extent > 0 ? 1.0 / static_cast<double>(s.extent) : 1.0;
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t e = 0; e < s.extent; ++e)
      for (std::size_t i = 0; i < s.inner; ++i)
        out[o * s.inner + i] += xv[(o * s.extent + e) * s.inner + i];
  if (average)
    for (double& v : out.data()) v *= factor;
  return x.tape().record(std::move(out), {x.id()}, [s, factor](const BackwardArgs& a) {
    Tensor& gx = *a.in_grads[0];
    for (std::size_t o = 0; o < s.outer; ++o)
      for (std::size_t e = 0; e < s.extent; ++e)
        for (std::size_t i = 0; i < s.inner; ++i)
          gx[(o * s.extent + e) * s.inner + i] += a.grad_out[o * s.inner + i] * factor;
  });
}

}  // namespace

Var sum(Var x, std::optional<std::size_t> axis) { return reduce(x, axis, false); }
Var mean(Var x, std::optional<std::size_t> axis) { return reduce(x, axis, true); }

Tensor softmax_rows(const Tensor& x) {
  require_matrix(x, "softmax_rows");
  const std::size_t n = x.dim(0), k = x.dim(1);
  Tensor out(x.dims());
  for (std::size_t r = 0; r < n; ++r) {
    double mx = x(r, 0);
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, x(r, j));
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      out(r, j) = std::exp(x(r, j) - mx);
      z += out(r, j);
    }
    for (std::size_t j = 0; j < k; ++j) out(r, j) /= z;
  }
  return out;
}

Var softmax_rows(Var x) {
  Tensor out = softmax_rows(x.value());
  return x.tape().record(std::move(out), {x.id()}, [](const BackwardArgs& a) {
    const Tensor& y = a.out_value;
    const std::size_t n = y.dim(0), k = y.dim(1);
    Tensor& gx = *a.in_grads[0];
    for (std::size_t r = 0; r < n; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < k; ++j) dot += a.grad_out[r * k + j] * y(r, j);
      for (std::size_t j = 0; j < k; ++j) gx(r, j) += y(r, j) * (a.grad_out[r * k + j] - dot);
    }
  });
}

}  // namespace ivgan
