#pragma once

#include <cstdint>
#include <vector>

#include "edgerec/numeric/autograd.hpp"

namespace edgerec::train {

struct AdamWConfig {
  double learning_rate = 1e-4;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias-corrected moments and decoupled weight decay.
template <typename Real>
class AdamW {
 public:
  AdamW(std::vector<numeric::Var<Real>> params, AdamWConfig config);

  /// Applies one update from the gradients currently stored on the parameters.
  void step();
  void zero_grad();
  std::uint64_t steps() const { return step_; }
  const AdamWConfig& config() const { return config_; }

 private:
  std::vector<numeric::Var<Real>> params_;
  AdamWConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::uint64_t step_ = 0;
};

}  // namespace edgerec::train
