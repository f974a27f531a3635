#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "edgerec/numeric/autograd.hpp"

// Differentiable primitives. Every op computes its forward value eagerly and,
// when any input requires a gradient, records an exact analytic backward.
namespace edgerec::numeric {

template <typename Real> Var<Real> add(const Var<Real>& a, const Var<Real>& b);
template <typename Real> Var<Real> sub(const Var<Real>& a, const Var<Real>& b);
template <typename Real> Var<Real> mul(const Var<Real>& a, const Var<Real>& b);
template <typename Real> Var<Real> scale(const Var<Real>& a, Real factor);
template <typename Real> Var<Real> add_scalar(const Var<Real>& a, Real offset);

/// x[..., d] + v[d], broadcast over leading axes.
template <typename Real> Var<Real> add_rowvec(const Var<Real>& x, const Var<Real>& v);
/// x[..., d] * v[d], broadcast over leading axes.
template <typename Real> Var<Real> mul_rowvec(const Var<Real>& x, const Var<Real>& v);

/// Affine map x[..., in] @ weight[in, out] (+ bias[out]).
template <typename Real> Var<Real> linear(const Var<Real>& x, const Var<Real>& weight);
template <typename Real>
Var<Real> linear(const Var<Real>& x, const Var<Real>& weight, const Var<Real>& bias);

/// Batched a[B, M, K] @ b[B, K, N].
template <typename Real> Var<Real> matmul(const Var<Real>& a, const Var<Real>& b);
/// Batched a[B, M, K] @ b[B, N, K]^T.
template <typename Real> Var<Real> matmul_nt(const Var<Real>& a, const Var<Real>& b);

/// Softmax over the last axis.
template <typename Real> Var<Real> softmax(const Var<Real>& x);
/// Normalizes the last axis to zero mean and unit variance, no affine terms.
template <typename Real> Var<Real> layer_norm(const Var<Real>& x, Real eps = Real(1e-6));
/// Layer norm followed by a learned gain and bias over the last axis.
template <typename Real>
Var<Real> layer_norm(const Var<Real>& x, const Var<Real>& gain, const Var<Real>& bias,
                     Real eps = Real(1e-6));

/// Exact (erf) GELU.
template <typename Real> Var<Real> gelu(const Var<Real>& x);
template <typename Real> Var<Real> silu(const Var<Real>& x);
template <typename Real> Var<Real> log_sigmoid(const Var<Real>& x);
/// Gradient passes where lo <= x <= hi.
template <typename Real> Var<Real> clamp(const Var<Real>& x, Real lo, Real hi);

template <typename Real> Var<Real> reshape(const Var<Real>& x, Shape shape);
/// out.shape[i] = x.shape[axes[i]].
template <typename Real> Var<Real> permute(const Var<Real>& x, const std::vector<std::size_t>& axes);
/// x[..., offset : offset + length] along the last axis.
template <typename Real> Var<Real> slice_last(const Var<Real>& x, std::size_t offset, std::size_t length);
/// Flat-index gather into a rank-1 result.
template <typename Real>
Var<Real> gather(const Var<Real>& x, const std::vector<std::size_t>& flat_indices);

template <typename Real> Var<Real> sum(const Var<Real>& x);
template <typename Real> Var<Real> mean(const Var<Real>& x);
/// mean(x^2) over every element.
template <typename Real> Var<Real> mean_square(const Var<Real>& x);
/// mean(x^2) over elements whose mask byte is nonzero; 0 when the mask is empty.
template <typename Real>
Var<Real> masked_mean_square(const Var<Real>& x, std::span<const std::uint8_t> mask);

}  // namespace edgerec::numeric
