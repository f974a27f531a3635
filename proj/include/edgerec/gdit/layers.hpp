#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "edgerec/common/rng.hpp"
#include "edgerec/numeric/ops.hpp"

namespace edgerec::gdit {

using numeric::Shape;
using numeric::Tensor;
using numeric::Var;

// Parameter groups. Each exposes `visit(prefix, f)` calling f(name, Var&)
// for every learnable tensor, in a fixed order.

template <typename Real>
struct Linear {
  Var<Real> weight;  // [in, out]
  Var<Real> bias;    // [out]

  Var<Real> operator()(const Var<Real>& x) const { return numeric::linear(x, weight, bias); }

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + ".weight", weight);
    f(prefix + ".bias", bias);
  }
};

template <typename Real>
struct Mlp {
  Linear<Real> fc1;
  Linear<Real> fc2;

  Var<Real> operator()(const Var<Real>& x) const { return fc2(numeric::gelu(fc1(x))); }

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    fc1.visit(prefix + ".fc1", f);
    fc2.visit(prefix + ".fc2", f);
  }
};

/// Projections for attention along rows then along columns, with one
/// output projection after the column pass.
template <typename Real>
struct AxialAttentionParams {
  Linear<Real> q_row, k_row, v_row;
  Linear<Real> q_col, k_col, v_col;
  Linear<Real> out;

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    q_row.visit(prefix + ".q_row", f);
    k_row.visit(prefix + ".k_row", f);
    v_row.visit(prefix + ".v_row", f);
    q_col.visit(prefix + ".q_col", f);
    k_col.visit(prefix + ".k_col", f);
    v_col.visit(prefix + ".v_col", f);
    out.visit(prefix + ".out", f);
  }
};

/// Projection, self-attention and MLP for one side's feature tokens.
template <typename Real>
struct FeatureEncoderParams {
  Linear<Real> proj;
  Linear<Real> q, k, v, out;
  Var<Real> ln1_gain, ln1_bias;
  Mlp<Real> mlp;
  Var<Real> ln2_gain, ln2_bias;

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    proj.visit(prefix + ".proj", f);
    q.visit(prefix + ".q", f);
    k.visit(prefix + ".k", f);
    v.visit(prefix + ".v", f);
    out.visit(prefix + ".out", f);
    f(prefix + ".ln1.gain", ln1_gain);
    f(prefix + ".ln1.bias", ln1_bias);
    mlp.visit(prefix + ".mlp", f);
    f(prefix + ".ln2.gain", ln2_gain);
    f(prefix + ".ln2.bias", ln2_bias);
  }
};

template <typename Real>
struct BlockParams {
  /// silu(c) -> (shift, scale, gate) for each of the three sub-layers.
  Linear<Real> modulation;
  AxialAttentionParams<Real> self_attn;
  AxialAttentionParams<Real> cross_attn;
  Mlp<Real> mlp;

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    modulation.visit(prefix + ".modulation", f);
    self_attn.visit(prefix + ".self_attn", f);
    cross_attn.visit(prefix + ".cross_attn", f);
    mlp.visit(prefix + ".mlp", f);
  }
};

// Initializers.
template <typename Real>
Linear<Real> make_linear(std::size_t in, std::size_t out, Rng& rng);
template <typename Real>
Linear<Real> make_zero_linear(std::size_t in, std::size_t out);
template <typename Real>
Mlp<Real> make_mlp(std::size_t d, std::size_t hidden, Rng& rng);
template <typename Real>
AxialAttentionParams<Real> make_axial_attention(std::size_t d, Rng& rng);
template <typename Real>
FeatureEncoderParams<Real> make_feature_encoder(std::size_t d_in, std::size_t d, std::size_t mlp_ratio,
                                                Rng& rng);
template <typename Real>
BlockParams<Real> make_block(std::size_t d, std::size_t mlp_ratio, Rng& rng);

/// Sinusoidal embedding: [sin(t w_k)..., cos(t w_k)...], w_k = 10000^(-2k/dim).
std::vector<double> timestep_embedding(double t, std::size_t dim);

/// Multi-head scaled dot-product attention. q: [B, Lq, d], k and v: [B, Lk, d].
template <typename Real>
Var<Real> multi_head_attention(const Var<Real>& q, const Var<Real>& k, const Var<Real>& v,
                               std::size_t heads);

/// Row-column separable self-attention on cell tokens x: [n, m, d]. Each cell
/// attends to its row (length m), then the result attends along its column
/// (length n).
template <typename Real>
Var<Real> rcsa_self(const Var<Real>& x, const AxialAttentionParams<Real>& params, std::size_t heads);

/// Row-column cross-attention: in the row pass every cell queries the m item
/// tokens, in the column pass every cell queries the n user tokens.
template <typename Real>
Var<Real> rcs_cross(const Var<Real>& x, const Var<Real>& user_tokens, const Var<Real>& item_tokens,
                    const AxialAttentionParams<Real>& params, std::size_t heads);

/// One side's raw features [count, d_in] -> tokens [count, d].
template <typename Real>
Var<Real> encode_side(const Var<Real>& raw, const FeatureEncoderParams<Real>& params, std::size_t heads);

/// adaLN-Zero block on x: [n, m, d] conditioned on c: [d].
template <typename Real>
Var<Real> gdit_block(const Var<Real>& x, const Var<Real>& conditioning, const Var<Real>& user_tokens,
                     const Var<Real>& item_tokens, const BlockParams<Real>& params, std::size_t heads);

}  // namespace edgerec::gdit
