#pragma once

#include <string>
#include <utility>
#include <vector>

#include "edgerec/common/rng.hpp"
#include "edgerec/gdit/config.hpp"
#include "edgerec/gdit/layers.hpp"

namespace edgerec::gdit {

/// The noise predictor eps_theta(x_t, t, U, I) over one n x m patch.
template <typename Real>
class GDiTModel {
 public:
  GDiTModel(const GDiTConfig& config, Rng& rng);

  const GDiTConfig& config() const { return config_; }

  /// x_t: [n, m]; user_features: [n, d_user_in]; item_features: [m, d_item_in].
  /// Returns the predicted noise, [n, m].
  Var<Real> forward(const Var<Real>& x_t, double t, const Tensor<Real>& user_features,
                    const Tensor<Real>& item_features) const;
  Var<Real> forward(const Tensor<Real>& x_t, double t, const Tensor<Real>& user_features,
                    const Tensor<Real>& item_features) const {
    return forward(Var<Real>::constant(x_t), t, user_features, item_features);
  }

  /// Parameters in a fixed order, named like "blocks.0.self_attn.q_row.weight".
  /// The handles share storage with the model.
  std::vector<std::pair<std::string, Var<Real>>> named_parameters();
  std::vector<Var<Real>> parameters();
  std::size_t parameter_count();

  template <typename Other>
  GDiTModel<Other> cast() const;

  template <typename F>
  void visit(F&& f) {
    input.visit("input", f);
    time_fc1.visit("time.fc1", f);
    time_fc2.visit("time.fc2", f);
    user_encoder.visit("user_encoder", f);
    item_encoder.visit("item_encoder", f);
    for (std::size_t b = 0; b < blocks.size(); ++b) blocks[b].visit("blocks." + std::to_string(b), f);
    f(std::string("final_norm.gain"), final_gain);
    f(std::string("final_norm.bias"), final_bias);
    output.visit("output", f);
  }

  Linear<Real> input;
  Linear<Real> time_fc1, time_fc2;
  FeatureEncoderParams<Real> user_encoder, item_encoder;
  std::vector<BlockParams<Real>> blocks;
  Var<Real> final_gain, final_bias;
  Linear<Real> output;

 private:
  GDiTConfig config_;
};

template <typename Real>
template <typename Other>
GDiTModel<Other> GDiTModel<Real>::cast() const {
  Rng scratch(0);
  GDiTModel<Other> out(config_, scratch);
  auto self = const_cast<GDiTModel<Real>*>(this)->named_parameters();
  auto target = out.named_parameters();
  for (std::size_t i = 0; i < self.size(); ++i) {
    target[i].second.mutable_value() = self[i].second.value().template cast<Other>();
  }
  return out;
}

}  // namespace edgerec::gdit
