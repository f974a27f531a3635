#pragma once

#include <cstddef>
#include <vector>

#include "edgerec/common/rng.hpp"
#include "edgerec/diffusion/schedule.hpp"
#include "edgerec/ingest/matrix.hpp"
#include "edgerec/numeric/autograd.hpp"

namespace edgerec::train {

using numeric::Tensor;
using numeric::Var;

struct LossConfig {
  double bpr_weight = 0.1;
  std::size_t bpr_pairs_per_user = 4;
  bool mask_unknown = false;
  /// Clamp range for the reconstructed x0 (the scaler's value range).
  double value_lo = -1.0;
  double value_hi = 1.0;
};

/// Patch cell (row, pos) should outrank (row, neg).
struct BprPair {
  std::size_t row;
  std::size_t pos;
  std::size_t neg;
};

/// For every patch row, the known pairs with strictly different true values,
/// all of them when there are at most `per_user`, otherwise `per_user` drawn
/// without replacement.
std::vector<BprPair> sample_bpr_pairs(const ingest::Patch& patch, std::size_t per_user, Rng& rng);

template <typename Real>
struct LossTerms {
  Var<Real> total;
  double mse = 0.0;
  double bpr = 0.0;
};

/// eps-MSE over all cells (known cells only when masking) plus bpr_weight
/// times the mean of -log sigmoid(x0_hat[pos] - x0_hat[neg]) over `pairs`,
/// where x0_hat is reconstructed from eps_hat and clamped.
template <typename Real>
LossTerms<Real> diffusion_loss(const Tensor<Real>& eps, const Var<Real>& eps_hat, const Tensor<Real>& x_t,
                               int t, const ingest::Patch& patch, const diffusion::NoiseSchedule& schedule,
                               const std::vector<BprPair>& pairs, const LossConfig& config);

}  // namespace edgerec::train
