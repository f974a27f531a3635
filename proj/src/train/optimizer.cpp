#include "edgerec/train/optimizer.hpp"

#include <cmath>

#include "edgerec/common/error.hpp"

namespace edgerec::train {

template <typename Real>
AdamW<Real>::AdamW(std::vector<numeric::Var<Real>> params, AdamWConfig config)
    : params_(std::move(params)), config_(config) {
  if (config_.learning_rate < 0 || config_.weight_decay < 0) {
    throw ParameterError("learning rate and weight decay must be non-negative");
  }
  for (const auto& p : params_) {
    m_.emplace_back(p.value().size(), 0.0);
    v_.emplace_back(p.value().size(), 0.0);
  }
}

template <typename Real>
void AdamW<Real>::step() {
  ++step_;
  const double lr = config_.learning_rate;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto* node = params_[k].node();
    auto& value = node->value;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = node->has_grad ? static_cast<double>(node->grad[i]) : 0.0;
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      double p = static_cast<double>(value[i]);
      p -= lr * config_.weight_decay * p;
      p -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.eps);
      value[i] = static_cast<Real>(p);
    }
  }
}

template <typename Real>
void AdamW<Real>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace edgerec::train
