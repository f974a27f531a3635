#include <cmath>

#include "edgerec/common/error.hpp"
#include "edgerec/gdit/config.hpp"
#include "edgerec/gdit/layers.hpp"

namespace edgerec::gdit {

namespace nm = numeric;

void GDiTConfig::validate() const {
  if (d_model == 0 || n_heads == 0 || n_blocks == 0 || mlp_ratio == 0 || d_user_in == 0 ||
      d_item_in == 0) {
    throw ParameterError("model dimensions must be positive");
  }
  if (d_model % n_heads != 0) throw ParameterError("d_model must be divisible by n_heads");
  if (d_model % 2 != 0) throw ParameterError("d_model must be even for the timestep embedding");
}

nlohmann::json to_json(const GDiTConfig& c) {
  return {{"d_model", c.d_model},     {"n_heads", c.n_heads},     {"n_blocks", c.n_blocks},
          {"mlp_ratio", c.mlp_ratio}, {"d_user_in", c.d_user_in}, {"d_item_in", c.d_item_in}};
}

GDiTConfig gdit_config_from_json(const nlohmann::json& j) {
  GDiTConfig c;
  c.d_model = j.value("d_model", c.d_model);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.n_blocks = j.value("n_blocks", c.n_blocks);
  c.mlp_ratio = j.value("mlp_ratio", c.mlp_ratio);
  c.d_user_in = j.value("d_user_in", c.d_user_in);
  c.d_item_in = j.value("d_item_in", c.d_item_in);
  return c;
}

namespace {

template <typename Real>
Var<Real> uniform_leaf(Shape shape, double limit, Rng& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor<Real> t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<Real>(dist(rng));
  return Var<Real>::leaf(std::move(t));
}

template <typename Real>
Var<Real> filled_leaf(std::size_t n, Real value) {
  return Var<Real>::leaf(Tensor<Real>(Shape{n}, value));
}

void require_rank(const Shape& s, std::size_t rank, const char* what) {
  if (s.size() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got " +
                     numeric::shape_string(s));
  }
}

}  // namespace

template <typename Real>
Linear<Real> make_linear(std::size_t in, std::size_t out, Rng& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  return {uniform_leaf<Real>({in, out}, limit, rng), filled_leaf<Real>(out, Real(0))};
}

template <typename Real>
Linear<Real> make_zero_linear(std::size_t in, std::size_t out) {
  return {Var<Real>::leaf(Tensor<Real>(Shape{in, out})), filled_leaf<Real>(out, Real(0))};
}

template <typename Real>
Mlp<Real> make_mlp(std::size_t d, std::size_t hidden, Rng& rng) {
  auto fc1 = make_linear<Real>(d, hidden, rng);
  auto fc2 = make_linear<Real>(hidden, d, rng);
  return {fc1, fc2};
}

template <typename Real>
AxialAttentionParams<Real> make_axial_attention(std::size_t d, Rng& rng) {
  AxialAttentionParams<Real> p;
  p.q_row = make_linear<Real>(d, d, rng);
  p.k_row = make_linear<Real>(d, d, rng);
  p.v_row = make_linear<Real>(d, d, rng);
  p.q_col = make_linear<Real>(d, d, rng);
  p.k_col = make_linear<Real>(d, d, rng);
  p.v_col = make_linear<Real>(d, d, rng);
  p.out = make_linear<Real>(d, d, rng);
  return p;
}

template <typename Real>
FeatureEncoderParams<Real> make_feature_encoder(std::size_t d_in, std::size_t d, std::size_t mlp_ratio,
                                                Rng& rng) {
  FeatureEncoderParams<Real> p;
  p.proj = make_linear<Real>(d_in, d, rng);
  p.q = make_linear<Real>(d, d, rng);
  p.k = make_linear<Real>(d, d, rng);
  p.v = make_linear<Real>(d, d, rng);
  p.out = make_linear<Real>(d, d, rng);
  p.ln1_gain = filled_leaf<Real>(d, Real(1));
  p.ln1_bias = filled_leaf<Real>(d, Real(0));
  p.mlp = make_mlp<Real>(d, d * mlp_ratio, rng);
  p.ln2_gain = filled_leaf<Real>(d, Real(1));
  p.ln2_bias = filled_leaf<Real>(d, Real(0));
  return p;
}

template <typename Real>
BlockParams<Real> make_block(std::size_t d, std::size_t mlp_ratio, Rng& rng) {
  BlockParams<Real> p;
  p.modulation = make_zero_linear<Real>(d, 9 * d);
  p.self_attn = make_axial_attention<Real>(d, rng);
  p.cross_attn = make_axial_attention<Real>(d, rng);
  p.mlp = make_mlp<Real>(d, d * mlp_ratio, rng);
  return p;
}

std::vector<double> timestep_embedding(double t, std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) throw ParameterError("timestep embedding dimension must be even");
  std::size_t half = dim / 2;
  std::vector<double> out(dim);
  for (std::size_t k = 0; k < half; ++k) {
    double omega = std::pow(10000.0, -2.0 * static_cast<double>(k) / static_cast<double>(dim));
    out[k] = std::sin(t * omega);
    out[half + k] = std::cos(t * omega);
  }
  return out;
}

template <typename Real>
Var<Real> multi_head_attention(const Var<Real>& q, const Var<Real>& k, const Var<Real>& v,
                               std::size_t heads) {
  require_rank(q.shape(), 3, "attention queries");
  require_rank(k.shape(), 3, "attention keys");
  require_rank(v.shape(), 3, "attention values");
  const std::size_t batch = q.shape()[0], lq = q.shape()[1], d = q.shape()[2];
  const std::size_t lk = k.shape()[1];
  if (k.shape() != v.shape() || k.shape()[0] != batch || k.shape()[2] != d) {
    throw ShapeError("attention: query " + numeric::shape_string(q.shape()) + ", key " +
                     numeric::shape_string(k.shape()) + ", value " + numeric::shape_string(v.shape()));
  }
  if (heads == 0 || d % heads != 0) throw ShapeError("attention: width not divisible by head count");
  const std::size_t dh = d / heads;

  auto split = [&](const Var<Real>& x, std::size_t len) {
    auto r = nm::reshape(x, {batch, len, heads, dh});
    return nm::reshape(nm::permute(r, {0, 2, 1, 3}), {batch * heads, len, dh});
  };
  auto qh = split(q, lq);
  auto kh = split(k, lk);
  auto vh = split(v, lk);
  auto scores = nm::scale(nm::matmul_nt(qh, kh), static_cast<Real>(1.0 / std::sqrt(static_cast<double>(dh))));
  auto mixed = nm::matmul(nm::softmax(scores), vh);
  auto merged = nm::permute(nm::reshape(mixed, {batch, heads, lq, dh}), {0, 2, 1, 3});
  return nm::reshape(merged, {batch, lq, d});
}

template <typename Real>
Var<Real> rcsa_self(const Var<Real>& x, const AxialAttentionParams<Real>& p, std::size_t heads) {
  require_rank(x.shape(), 3, "rcsa_self input");
  // Rows: batch over n, sequence over m.
  auto rows = multi_head_attention(p.q_row(x), p.k_row(x), p.v_row(x), heads);
  // Columns: the same on the transpose.
  auto xt = nm::permute(rows, {1, 0, 2});
  auto cols = multi_head_attention(p.q_col(xt), p.k_col(xt), p.v_col(xt), heads);
  return p.out(nm::permute(cols, {1, 0, 2}));
}

template <typename Real>
Var<Real> rcs_cross(const Var<Real>& x, const Var<Real>& user_tokens, const Var<Real>& item_tokens,
                    const AxialAttentionParams<Real>& p, std::size_t heads) {
  require_rank(x.shape(), 3, "rcs_cross input");
  require_rank(user_tokens.shape(), 2, "user tokens");
  require_rank(item_tokens.shape(), 2, "item tokens");
  const std::size_t n = x.shape()[0], m = x.shape()[1], d = x.shape()[2];
  if (user_tokens.shape() != Shape{n, d} || item_tokens.shape() != Shape{m, d}) {
    throw ShapeError("rcs_cross: cells " + numeric::shape_string(x.shape()) + " vs user tokens " +
                     numeric::shape_string(user_tokens.shape()) + " and item tokens " +
                     numeric::shape_string(item_tokens.shape()));
  }
  auto cells = nm::reshape(x, {1, n * m, d});
  auto items = nm::reshape(item_tokens, {1, m, d});
  auto rows = multi_head_attention(p.q_row(cells), p.k_row(items), p.v_row(items), heads);
  auto users = nm::reshape(user_tokens, {1, n, d});
  auto cols = multi_head_attention(p.q_col(rows), p.k_col(users), p.v_col(users), heads);
  return nm::reshape(p.out(cols), {n, m, d});
}

template <typename Real>
Var<Real> encode_side(const Var<Real>& raw, const FeatureEncoderParams<Real>& p, std::size_t heads) {
  require_rank(raw.shape(), 2, "feature table");
  const std::size_t d_in = p.proj.weight.shape()[0];
  if (raw.shape()[1] != d_in) {
    throw ShapeError("feature width " + std::to_string(raw.shape()[1]) + " does not match the configured " +
                     std::to_string(d_in));
  }
  const std::size_t count = raw.shape()[0];
  auto h = p.proj(raw);
  const std::size_t d = h.shape()[1];
  auto tokens = nm::reshape(h, {1, count, d});
  auto attn = nm::reshape(p.out(multi_head_attention(p.q(tokens), p.k(tokens), p.v(tokens), heads)),
                          {count, d});
  h = nm::layer_norm(nm::add(h, attn), p.ln1_gain, p.ln1_bias);
  h = nm::layer_norm(nm::add(h, p.mlp(h)), p.ln2_gain, p.ln2_bias);
  return h;
}

template <typename Real>
Var<Real> gdit_block(const Var<Real>& x, const Var<Real>& conditioning, const Var<Real>& user_tokens,
                     const Var<Real>& item_tokens, const BlockParams<Real>& p, std::size_t heads) {
  require_rank(x.shape(), 3, "block input");
  const std::size_t d = x.shape()[2];
  if (conditioning.shape() != Shape{d}) throw ShapeError("block conditioning must have shape [d]");
  auto mod = p.modulation(nm::reshape(nm::silu(conditioning), {1, d}));
  mod = nm::reshape(mod, {9 * d});
  auto chunk = [&](std::size_t i) { return nm::slice_last(mod, i * d, d); };

  auto modulated = [&](const Var<Real>& h, std::size_t i) {
    auto shift = chunk(3 * i);
    auto scale = nm::add_scalar(chunk(3 * i + 1), Real(1));
    return nm::add_rowvec(nm::mul_rowvec(nm::layer_norm(h), scale), shift);
  };
  auto gated = [&](const Var<Real>& h, const Var<Real>& update, std::size_t i) {
    return nm::add(h, nm::mul_rowvec(update, chunk(3 * i + 2)));
  };

  auto h = gated(x, rcsa_self(modulated(x, 0), p.self_attn, heads), 0);
  h = gated(h, rcs_cross(modulated(h, 1), user_tokens, item_tokens, p.cross_attn, heads), 1);
  h = gated(h, p.mlp(modulated(h, 2)), 2);
  return h;
}

#define EDGEREC_INSTANTIATE_LAYERS(Real)                                                                \
  template Linear<Real> make_linear<Real>(std::size_t, std::size_t, Rng&);                             \
  template Linear<Real> make_zero_linear<Real>(std::size_t, std::size_t);                              \
  template Mlp<Real> make_mlp<Real>(std::size_t, std::size_t, Rng&);                                   \
  template AxialAttentionParams<Real> make_axial_attention<Real>(std::size_t, Rng&);                   \
  template FeatureEncoderParams<Real> make_feature_encoder<Real>(std::size_t, std::size_t, std::size_t, \
                                                                 Rng&);                                 \
  template BlockParams<Real> make_block<Real>(std::size_t, std::size_t, Rng&);                         \
  template Var<Real> multi_head_attention<Real>(const Var<Real>&, const Var<Real>&, const Var<Real>&,  \
                                                std::size_t);                                           \
  template Var<Real> rcsa_self<Real>(const Var<Real>&, const AxialAttentionParams<Real>&, std::size_t); \
  template Var<Real> rcs_cross<Real>(const Var<Real>&, const Var<Real>&, const Var<Real>&,             \
                                     const AxialAttentionParams<Real>&, std::size_t);                  \
  template Var<Real> encode_side<Real>(const Var<Real>&, const FeatureEncoderParams<Real>&, std::size_t); \
  template Var<Real> gdit_block<Real>(const Var<Real>&, const Var<Real>&, const Var<Real>&,            \
                                      const Var<Real>&, const BlockParams<Real>&, std::size_t);

EDGEREC_INSTANTIATE_LAYERS(float)
EDGEREC_INSTANTIATE_LAYERS(double)

}  // namespace edgerec::gdit
