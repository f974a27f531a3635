#include "edgerec/gdit/model.hpp"

#include "edgerec/common/error.hpp"

namespace edgerec::gdit {

namespace nm = numeric;

template <typename Real>
GDiTModel<Real>::GDiTModel(const GDiTConfig& config, Rng& rng) : config_(config) {
  config_.validate();
  const std::size_t d = config_.d_model;
  input = make_linear<Real>(1, d, rng);
  // A nonzero input bias keeps the per-cell layer norm from erasing |x_t|.
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& b : input.bias.mutable_value().data()) b = static_cast<Real>(dist(rng));
  time_fc1 = make_linear<Real>(d, d, rng);
  time_fc2 = make_linear<Real>(d, d, rng);
  user_encoder = make_feature_encoder<Real>(config_.d_user_in, d, config_.mlp_ratio, rng);
  item_encoder = make_feature_encoder<Real>(config_.d_item_in, d, config_.mlp_ratio, rng);
  for (std::size_t b = 0; b < config_.n_blocks; ++b) blocks.push_back(make_block<Real>(d, config_.mlp_ratio, rng));
  final_gain = Var<Real>::leaf(Tensor<Real>(Shape{d}, Real(1)));
  final_bias = Var<Real>::leaf(Tensor<Real>(Shape{d}, Real(0)));
  output = make_zero_linear<Real>(d, 1);
}

template <typename Real>
Var<Real> GDiTModel<Real>::forward(const Var<Real>& x_t, double t, const Tensor<Real>& user_features,
                                   const Tensor<Real>& item_features) const {
  if (x_t.shape().size() != 2) throw ShapeError("x_t must be a matrix, got " + nm::shape_string(x_t.shape()));
  const std::size_t n = x_t.shape()[0], m = x_t.shape()[1], d = config_.d_model;
  if (user_features.shape() != Shape{n, config_.d_user_in}) {
    throw ShapeError("user features " + nm::shape_string(user_features.shape()) + " do not match [" +
                     std::to_string(n) + ", " + std::to_string(config_.d_user_in) + "]");
  }
  if (item_features.shape() != Shape{m, config_.d_item_in}) {
    throw ShapeError("item features " + nm::shape_string(item_features.shape()) + " do not match [" +
                     std::to_string(m) + ", " + std::to_string(config_.d_item_in) + "]");
  }

  auto emb = timestep_embedding(t, d);
  Tensor<Real> emb_t(Shape{1, d});
  for (std::size_t k = 0; k < d; ++k) emb_t[k] = static_cast<Real>(emb[k]);
  auto c = time_fc2(nm::silu(time_fc1(Var<Real>::constant(std::move(emb_t)))));
  c = nm::reshape(c, {d});

  auto users = encode_side(Var<Real>::constant(user_features), user_encoder, config_.n_heads);
  auto items = encode_side(Var<Real>::constant(item_features), item_encoder, config_.n_heads);

  auto h = input(nm::reshape(x_t, {n, m, 1}));
  for (const auto& block : blocks) h = gdit_block(h, c, users, items, block, config_.n_heads);
  h = nm::layer_norm(h, final_gain, final_bias);
  return nm::reshape(output(h), {n, m});
}

template <typename Real>
std::vector<std::pair<std::string, Var<Real>>> GDiTModel<Real>::named_parameters() {
  std::vector<std::pair<std::string, Var<Real>>> out;
  visit([&](const std::string& name, Var<Real>& v) { out.emplace_back(name, v); });
  return out;
}

template <typename Real>
std::vector<Var<Real>> GDiTModel<Real>::parameters() {
  std::vector<Var<Real>> out;
  visit([&](const std::string&, Var<Real>& v) { out.push_back(v); });
  return out;
}

template <typename Real>
std::size_t GDiTModel<Real>::parameter_count() {
  std::size_t total = 0;
  visit([&](const std::string&, Var<Real>& v) { total += v.value().size(); });
  return total;
}

template class GDiTModel<float>;
template class GDiTModel<double>;

}  // namespace edgerec::gdit
