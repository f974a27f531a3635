#include "edgerec/numeric/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace edgerec::numeric {

namespace {

template <typename Real>
using RowMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using MapMat = Eigen::Map<RowMat<Real>>;
template <typename Real>
using ConstMapMat = Eigen::Map<const RowMat<Real>>;
template <typename Real>
using MapRow = Eigen::Map<Eigen::Matrix<Real, 1, Eigen::Dynamic>>;
template <typename Real>
using ConstMapRow = Eigen::Map<const Eigen::Matrix<Real, 1, Eigen::Dynamic>>;

template <typename Real>
Var<Real> make_result(Tensor<Real> value, std::vector<Var<Real>> inputs,
                      std::function<void(Node<Real>&)> backward) {
  auto node = std::make_shared<Node<Real>>();
  node->value = std::move(value);
  bool needs = NoGradGuard::enabled() && std::any_of(inputs.begin(), inputs.end(),
                           [](const Var<Real>& v) { return v.requires_grad(); });
  if (needs) {
    node->requires_grad = true;
    node->parents.reserve(inputs.size());
    for (auto& in : inputs) node->parents.push_back(in.shared());
    node->backward = std::move(backward);
  }
  return Var<Real>(std::move(node));
}

template <typename Real>
Node<Real>& parent(Node<Real>& n, std::size_t i) {
  return *n.parents[i];
}

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                     shape_string(b));
  }
}

std::size_t last_dim(const Shape& s, const char* op) {
  if (s.empty()) throw ShapeError(std::string(op) + ": rank-0 input");
  return s.back();
}

template <typename Real, typename Fwd, typename Deriv>
Var<Real> unary(const Var<Real>& x, Fwd fwd, Deriv deriv) {
  const auto& xv = x.value();
  Tensor<Real> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
  return make_result<Real>(std::move(out), {x}, [deriv](Node<Real>& n) {
    auto& p = parent(n, 0);
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * deriv(p.value[i], n.value[i]);
  });
}

template <typename Real>
Real sigmoid(Real x) {
  if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
  Real e = std::exp(x);
  return e / (Real(1) + e);
}

}  // namespace

template <typename Real>
Var<Real> add(const Var<Real>& a, const Var<Real>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  Tensor<Real> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  return make_result<Real>(std::move(out), {a, b}, [](Node<Real>& n) {
    for (std::size_t k = 0; k < 2; ++k) {
      auto& p = parent(n, k);
      if (!p.requires_grad) continue;
      auto& g = p.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
  });
}

template <typename Real>
Var<Real> sub(const Var<Real>& a, const Var<Real>& b) {
  require_same_shape(a.shape(), b.shape(), "sub");
  Tensor<Real> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  return make_result<Real>(std::move(out), {a, b}, [](Node<Real>& n) {
    if (parent(n, 0).requires_grad) {
      auto& g = parent(n, 0).grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (parent(n, 1).requires_grad) {
      auto& g = parent(n, 1).grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= n.grad[i];
    }
  });
}

template <typename Real>
Var<Real> mul(const Var<Real>& a, const Var<Real>& b) {
  require_same_shape(a.shape(), b.shape(), "mul");
  Tensor<Real> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  return make_result<Real>(std::move(out), {a, b}, [](Node<Real>& n) {
    auto& pa = parent(n, 0);
    auto& pb = parent(n, 1);
    if (pa.requires_grad) {
      auto& g = pa.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      auto& g = pb.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pa.value[i];
    }
  });
}

template <typename Real>
Var<Real> scale(const Var<Real>& a, Real factor) {
  return unary<Real>(a, [factor](Real x) { return x * factor; },
                     [factor](Real, Real) { return factor; });
}

template <typename Real>
Var<Real> add_scalar(const Var<Real>& a, Real offset) {
  return unary<Real>(a, [offset](Real x) { return x + offset; }, [](Real, Real) { return Real(1); });
}

template <typename Real>
Var<Real> add_rowvec(const Var<Real>& x, const Var<Real>& v) {
  std::size_t d = last_dim(x.shape(), "add_rowvec");
  if (v.value().size() != d) throw ShapeError("add_rowvec: vector length mismatch");
  std::size_t rows = x.value().size() / d;
  Tensor<Real> out(x.shape());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < d; ++j) out[r * d + j] = x.value()[r * d + j] + v.value()[j];
  return make_result<Real>(std::move(out), {x, v}, [rows, d](Node<Real>& n) {
    if (parent(n, 0).requires_grad) {
      auto& g = parent(n, 0).grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (parent(n, 1).requires_grad) {
      auto& g = parent(n, 1).grad_buffer();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < d; ++j) g[j] += n.grad[r * d + j];
    }
  });
}

template <typename Real>
Var<Real> mul_rowvec(const Var<Real>& x, const Var<Real>& v) {
  std::size_t d = last_dim(x.shape(), "mul_rowvec");
  if (v.value().size() != d) throw ShapeError("mul_rowvec: vector length mismatch");
  std::size_t rows = x.value().size() / d;
  Tensor<Real> out(x.shape());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < d; ++j) out[r * d + j] = x.value()[r * d + j] * v.value()[j];
  return make_result<Real>(std::move(out), {x, v}, [rows, d](Node<Real>& n) {
    auto& px = parent(n, 0);
    auto& pv = parent(n, 1);
    if (px.requires_grad) {
      auto& g = px.grad_buffer();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < d; ++j) g[r * d + j] += n.grad[r * d + j] * pv.value[j];
    }
    if (pv.requires_grad) {
      auto& g = pv.grad_buffer();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < d; ++j) g[j] += n.grad[r * d + j] * px.value[r * d + j];
    }
  });
}

namespace {

// Products read from and write to Eigen-owned buffers only: Eigen's vectorized
// kernels split loops by buffer alignment, so a product touching heap-mapped
// data directly can round differently from one run to the next.
template <typename Real>
RowMat<Real> owned(const Real* data, std::size_t rows, std::size_t cols) {
  return ConstMapMat<Real>(data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <typename Real>
Var<Real> linear_impl(const Var<Real>& x, const Var<Real>& weight, const Var<Real>* bias) {
  const auto& ws = weight.shape();
  if (ws.size() != 2) throw ShapeError("linear: weight must be rank 2");
  std::size_t in = ws[0];
  std::size_t out_dim = ws[1];
  if (last_dim(x.shape(), "linear") != in) {
    throw ShapeError("linear: input " + shape_string(x.shape()) + " vs weight " + shape_string(ws));
  }
  if (bias && bias->value().size() != out_dim) throw ShapeError("linear: bias length mismatch");
  std::size_t rows = x.value().size() / in;

  Shape out_shape = x.shape();
  out_shape.back() = out_dim;
  Tensor<Real> out(out_shape);
  MapMat<Real> Y(out.ptr(), rows, out_dim);
  Y = RowMat<Real>(owned(x.value().ptr(), rows, in) * owned(weight.value().ptr(), in, out_dim));
  if (bias) Y.rowwise() += ConstMapRow<Real>(bias->value().ptr(), out_dim);

  std::vector<Var<Real>> inputs{x, weight};
  if (bias) inputs.push_back(*bias);
  return make_result<Real>(std::move(out), std::move(inputs), [rows, in, out_dim](Node<Real>& n) {
    auto& px = parent(n, 0);
    auto& pw = parent(n, 1);
    RowMat<Real> dY = owned(n.grad.ptr(), rows, out_dim);
    if (px.requires_grad) {
      MapMat<Real> dX(px.grad_buffer().ptr(), rows, in);
      dX += RowMat<Real>(dY * owned(pw.value.ptr(), in, out_dim).transpose());
    }
    if (pw.requires_grad) {
      MapMat<Real> dW(pw.grad_buffer().ptr(), in, out_dim);
      dW += RowMat<Real>(owned(px.value.ptr(), rows, in).transpose() * dY);
    }
    if (n.parents.size() > 2 && parent(n, 2).requires_grad) {
      MapRow<Real> db(parent(n, 2).grad_buffer().ptr(), out_dim);
      db += Eigen::Matrix<Real, 1, Eigen::Dynamic>(dY.colwise().sum());
    }
  });
}

template <typename Real>
Var<Real> batched_matmul(const Var<Real>& a, const Var<Real>& b, bool transpose_b) {
  const auto& as = a.shape();
  const auto& bs = b.shape();
  if (as.size() != 3 || bs.size() != 3 || as[0] != bs[0]) {
    throw ShapeError("matmul: expected [B,M,K] and [B,*,*], got " + shape_string(as) + " and " +
                     shape_string(bs));
  }
  std::size_t batch = as[0], m = as[1], k = as[2];
  std::size_t n_cols = transpose_b ? bs[1] : bs[2];
  std::size_t b_inner = transpose_b ? bs[2] : bs[1];
  if (b_inner != k) throw ShapeError("matmul: inner dimension mismatch");

  Tensor<Real> out(Shape{batch, m, n_cols});
  std::size_t b_rows = bs[1], b_cols = bs[2];
  for (std::size_t i = 0; i < batch; ++i) {
    RowMat<Real> A = owned(a.value().ptr() + i * m * k, m, k);
    RowMat<Real> B = owned(b.value().ptr() + i * b_rows * b_cols, b_rows, b_cols);
    MapMat<Real> C(out.ptr() + i * m * n_cols, m, n_cols);
    if (transpose_b) {
      C = RowMat<Real>(A * B.transpose());
    } else {
      C = RowMat<Real>(A * B);
    }
  }
  return make_result<Real>(
      std::move(out), {a, b}, [batch, m, k, n_cols, b_rows, b_cols, transpose_b](Node<Real>& n) {
        auto& pa = parent(n, 0);
        auto& pb = parent(n, 1);
        for (std::size_t i = 0; i < batch; ++i) {
          RowMat<Real> dC = owned(n.grad.ptr() + i * m * n_cols, m, n_cols);
          RowMat<Real> A = owned(pa.value.ptr() + i * m * k, m, k);
          RowMat<Real> B = owned(pb.value.ptr() + i * b_rows * b_cols, b_rows, b_cols);
          if (pa.requires_grad) {
            MapMat<Real> dA(pa.grad_buffer().ptr() + i * m * k, m, k);
            if (transpose_b) {
              dA += RowMat<Real>(dC * B);
            } else {
              dA += RowMat<Real>(dC * B.transpose());
            }
          }
          if (pb.requires_grad) {
            MapMat<Real> dB(pb.grad_buffer().ptr() + i * b_rows * b_cols, b_rows, b_cols);
            if (transpose_b) {
              dB += RowMat<Real>(dC.transpose() * A);
            } else {
              dB += RowMat<Real>(A.transpose() * dC);
            }
          }
        }
      });
}

}  // namespace

template <typename Real>
Var<Real> linear(const Var<Real>& x, const Var<Real>& weight) {
  return linear_impl<Real>(x, weight, nullptr);
}

template <typename Real>
Var<Real> linear(const Var<Real>& x, const Var<Real>& weight, const Var<Real>& bias) {
  return linear_impl<Real>(x, weight, &bias);
}

template <typename Real>
Var<Real> matmul(const Var<Real>& a, const Var<Real>& b) {
  return batched_matmul<Real>(a, b, false);
}

template <typename Real>
Var<Real> matmul_nt(const Var<Real>& a, const Var<Real>& b) {
  return batched_matmul<Real>(a, b, true);
}

template <typename Real>
Var<Real> softmax(const Var<Real>& x) {
  std::size_t d = last_dim(x.shape(), "softmax");
  std::size_t rows = x.value().size() / d;
  Tensor<Real> out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* in = x.value().ptr() + r * d;
    Real* o = out.ptr() + r * d;
    Real mx = *std::max_element(in, in + d);
    Real total = 0;
    for (std::size_t j = 0; j < d; ++j) {
      o[j] = std::exp(in[j] - mx);
      total += o[j];
    }
    for (std::size_t j = 0; j < d; ++j) o[j] /= total;
  }
  return make_result<Real>(std::move(out), {x}, [rows, d](Node<Real>& n) {
    auto& p = parent(n, 0);
    auto& g = p.grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const Real* y = n.value.ptr() + r * d;
      const Real* dy = n.grad.ptr() + r * d;
      Real dot = 0;
      for (std::size_t j = 0; j < d; ++j) dot += dy[j] * y[j];
      for (std::size_t j = 0; j < d; ++j) g[r * d + j] += y[j] * (dy[j] - dot);
    }
  });
}

template <typename Real>
Var<Real> layer_norm(const Var<Real>& x, Real eps) {
  std::size_t d = last_dim(x.shape(), "layer_norm");
  std::size_t rows = x.value().size() / d;
  Tensor<Real> out(x.shape());
  std::vector<Real> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* in = x.value().ptr() + r * d;
    Real mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += in[j];
    mu /= Real(d);
    Real var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (in[j] - mu) * (in[j] - mu);
    var /= Real(d);
    inv_std[r] = Real(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) out[r * d + j] = (in[j] - mu) * inv_std[r];
  }
  return make_result<Real>(std::move(out), {x}, [rows, d, inv_std = std::move(inv_std)](Node<Real>& n) {
    auto& g = parent(n, 0).grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const Real* y = n.value.ptr() + r * d;
      const Real* dy = n.grad.ptr() + r * d;
      Real mean_dy = 0, mean_dy_y = 0;
      for (std::size_t j = 0; j < d; ++j) {
        mean_dy += dy[j];
        mean_dy_y += dy[j] * y[j];
      }
      mean_dy /= Real(d);
      mean_dy_y /= Real(d);
      for (std::size_t j = 0; j < d; ++j)
        g[r * d + j] += inv_std[r] * (dy[j] - mean_dy - y[j] * mean_dy_y);
    }
  });
}

template <typename Real>
Var<Real> layer_norm(const Var<Real>& x, const Var<Real>& gain, const Var<Real>& bias, Real eps) {
  return add_rowvec(mul_rowvec(layer_norm(x, eps), gain), bias);
}

template <typename Real>
Var<Real> gelu(const Var<Real>& x) {
  constexpr Real inv_sqrt2 = Real(1) / std::numbers::sqrt2_v<Real>;
  constexpr Real inv_sqrt_2pi = std::numbers::inv_sqrtpi_v<Real> * inv_sqrt2;
  return unary<Real>(
      x, [](Real v) { return Real(0.5) * v * (Real(1) + std::erf(v * inv_sqrt2)); },
      [](Real v, Real) {
        Real cdf = Real(0.5) * (Real(1) + std::erf(v * inv_sqrt2));
        Real pdf = inv_sqrt_2pi * std::exp(Real(-0.5) * v * v);
        return cdf + v * pdf;
      });
}

template <typename Real>
Var<Real> silu(const Var<Real>& x) {
  return unary<Real>(
      x, [](Real v) { return v * sigmoid(v); },
      [](Real v, Real) {
        Real s = sigmoid(v);
        return s * (Real(1) + v * (Real(1) - s));
      });
}

template <typename Real>
Var<Real> log_sigmoid(const Var<Real>& x) {
  return unary<Real>(
      x,
      [](Real v) {
        return v < 0 ? v - std::log1p(std::exp(v)) : -std::log1p(std::exp(-v));
      },
      [](Real v, Real) { return sigmoid(-v); });
}

template <typename Real>
Var<Real> clamp(const Var<Real>& x, Real lo, Real hi) {
  return unary<Real>(
      x, [lo, hi](Real v) { return std::clamp(v, lo, hi); },
      [lo, hi](Real v, Real) { return (v >= lo && v <= hi) ? Real(1) : Real(0); });
}

template <typename Real>
Var<Real> reshape(const Var<Real>& x, Shape shape) {
  Tensor<Real> out = x.value().reshaped(std::move(shape));
  return make_result<Real>(std::move(out), {x}, [](Node<Real>& n) {
    auto& g = parent(n, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
  });
}

namespace {

// For every output flat index, the flat index of the corresponding input element.
std::vector<std::size_t> permutation_map(const Shape& in_shape, const std::vector<std::size_t>& axes) {
  std::size_t rank = in_shape.size();
  std::vector<std::size_t> in_strides(rank, 1);
  for (std::size_t i = rank; i-- > 1;) in_strides[i - 1] = in_strides[i] * in_shape[i];
  Shape out_shape(rank);
  std::vector<std::size_t> strides(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    out_shape[i] = in_shape[axes[i]];
    strides[i] = in_strides[axes[i]];
  }
  std::size_t total = shape_size(in_shape);
  std::vector<std::size_t> map(total);
  std::vector<std::size_t> counter(rank, 0);
  std::size_t offset = 0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    map[flat] = offset;
    for (std::size_t ax = rank; ax-- > 0;) {
      offset += strides[ax];
      if (++counter[ax] < out_shape[ax]) break;
      offset -= strides[ax] * out_shape[ax];
      counter[ax] = 0;
    }
  }
  return map;
}

}  // namespace

template <typename Real>
Var<Real> permute(const Var<Real>& x, const std::vector<std::size_t>& axes) {
  const Shape& in_shape = x.shape();
  if (axes.size() != in_shape.size()) throw ShapeError("permute: axis count mismatch");
  std::vector<bool> seen(axes.size(), false);
  for (auto a : axes) {
    if (a >= axes.size() || seen[a]) throw ShapeError("permute: invalid axis list");
    seen[a] = true;
  }
  Shape out_shape(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) out_shape[i] = in_shape[axes[i]];
  auto map = permutation_map(in_shape, axes);
  Tensor<Real> out(out_shape);
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = x.value()[map[i]];
  return make_result<Real>(std::move(out), {x}, [map = std::move(map)](Node<Real>& n) {
    auto& g = parent(n, 0).grad_buffer();
    for (std::size_t i = 0; i < map.size(); ++i) g[map[i]] += n.grad[i];
  });
}

template <typename Real>
Var<Real> slice_last(const Var<Real>& x, std::size_t offset, std::size_t length) {
  std::size_t d = last_dim(x.shape(), "slice_last");
  if (offset + length > d) throw ShapeError("slice_last: range out of bounds");
  std::size_t rows = x.value().size() / d;
  Shape out_shape = x.shape();
  out_shape.back() = length;
  Tensor<Real> out(out_shape);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < length; ++j) out[r * length + j] = x.value()[r * d + offset + j];
  return make_result<Real>(std::move(out), {x}, [rows, d, offset, length](Node<Real>& n) {
    auto& g = parent(n, 0).grad_buffer();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < length; ++j) g[r * d + offset + j] += n.grad[r * length + j];
  });
}

template <typename Real>
Var<Real> gather(const Var<Real>& x, const std::vector<std::size_t>& flat_indices) {
  Tensor<Real> out(Shape{flat_indices.size()});
  for (std::size_t i = 0; i < flat_indices.size(); ++i) {
    if (flat_indices[i] >= x.value().size()) throw ShapeError("gather: index out of range");
    out[i] = x.value()[flat_indices[i]];
  }
  return make_result<Real>(std::move(out), {x}, [flat_indices](Node<Real>& n) {
    auto& g = parent(n, 0).grad_buffer();
    for (std::size_t i = 0; i < flat_indices.size(); ++i) g[flat_indices[i]] += n.grad[i];
  });
}

template <typename Real>
Var<Real> sum(const Var<Real>& x) {
  Real total = 0;
  for (auto v : x.value().data()) total += v;
  return make_result<Real>(Tensor<Real>::scalar(total), {x}, [](Node<Real>& n) {
    auto& g = parent(n, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[0];
  });
}

template <typename Real>
Var<Real> mean(const Var<Real>& x) {
  return scale(sum(x), Real(1) / Real(x.value().size()));
}

template <typename Real>
Var<Real> mean_square(const Var<Real>& x) {
  const auto& xv = x.value();
  Real total = 0;
  for (auto v : xv.data()) total += v * v;
  std::size_t count = xv.size();
  return make_result<Real>(Tensor<Real>::scalar(total / Real(count)), {x}, [count](Node<Real>& n) {
    auto& p = parent(n, 0);
    auto& g = p.grad_buffer();
    Real coeff = Real(2) * n.grad[0] / Real(count);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += coeff * p.value[i];
  });
}

template <typename Real>
Var<Real> masked_mean_square(const Var<Real>& x, std::span<const std::uint8_t> mask) {
  const auto& xv = x.value();
  if (mask.size() != xv.size()) throw ShapeError("masked_mean_square: mask length mismatch");
  std::vector<std::uint8_t> keep(mask.begin(), mask.end());
  Real total = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    if (keep[i]) {
      total += xv[i] * xv[i];
      ++count;
    }
  }
  Real value = count ? total / Real(count) : Real(0);
  return make_result<Real>(Tensor<Real>::scalar(value), {x},
                           [count, keep = std::move(keep)](Node<Real>& n) {
                             if (count == 0) return;
                             auto& p = parent(n, 0);
                             auto& g = p.grad_buffer();
                             Real coeff = Real(2) * n.grad[0] / Real(count);
                             for (std::size_t i = 0; i < g.size(); ++i)
                               if (keep[i]) g[i] += coeff * p.value[i];
                           });
}

#define EDGEREC_INSTANTIATE_OPS(Real)                                                          \
  template Var<Real> add(const Var<Real>&, const Var<Real>&);                                  \
  template Var<Real> sub(const Var<Real>&, const Var<Real>&);                                  \
  template Var<Real> mul(const Var<Real>&, const Var<Real>&);                                  \
  template Var<Real> scale(const Var<Real>&, Real);                                            \
  template Var<Real> add_scalar(const Var<Real>&, Real);                                       \
  template Var<Real> add_rowvec(const Var<Real>&, const Var<Real>&);                           \
  template Var<Real> mul_rowvec(const Var<Real>&, const Var<Real>&);                           \
  template Var<Real> linear(const Var<Real>&, const Var<Real>&);                               \
  template Var<Real> linear(const Var<Real>&, const Var<Real>&, const Var<Real>&);             \
  template Var<Real> matmul(const Var<Real>&, const Var<Real>&);                               \
  template Var<Real> matmul_nt(const Var<Real>&, const Var<Real>&);                            \
  template Var<Real> softmax(const Var<Real>&);                                                \
  template Var<Real> layer_norm(const Var<Real>&, Real);                                       \
  template Var<Real> layer_norm(const Var<Real>&, const Var<Real>&, const Var<Real>&, Real);   \
  template Var<Real> gelu(const Var<Real>&);                                                   \
  template Var<Real> silu(const Var<Real>&);                                                   \
  template Var<Real> log_sigmoid(const Var<Real>&);                                            \
  template Var<Real> clamp(const Var<Real>&, Real, Real);                                      \
  template Var<Real> reshape(const Var<Real>&, Shape);                                         \
  template Var<Real> permute(const Var<Real>&, const std::vector<std::size_t>&);               \
  template Var<Real> slice_last(const Var<Real>&, std::size_t, std::size_t);                   \
  template Var<Real> gather(const Var<Real>&, const std::vector<std::size_t>&);                \
  template Var<Real> sum(const Var<Real>&);                                                    \
  template Var<Real> mean(const Var<Real>&);                                                   \
  template Var<Real> mean_square(const Var<Real>&);                                            \
  template Var<Real> masked_mean_square(const Var<Real>&, std::span<const std::uint8_t>);

EDGEREC_INSTANTIATE_OPS(float)
EDGEREC_INSTANTIATE_OPS(double)

}  // namespace edgerec::numeric
