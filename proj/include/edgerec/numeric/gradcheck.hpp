#pragma once

#include <functional>
#include <vector>

#include "edgerec/common/rng.hpp"
#include "edgerec/numeric/autograd.hpp"

namespace edgerec::numeric {

template <typename Real>
using ScalarFunction = std::function<Var<Real>(const std::vector<Var<Real>>&)>;

struct GradCheckOptions {
  int directions = 4;
  /// Directional derivatives with magnitude below this (times 1 + |f|) count as agreeing.
  double abs_floor = 1e-9;
};

/// Central finite differences of `fn` along random directions against its
/// analytic reverse-mode gradient. Returns the largest relative error seen,
/// where the error along direction v is |g.v - fd| / max(sum_i |g_i v_i|, |fd|).
/// Dividing by |g.v| alone is unbounded for any rounded gradient whenever the
/// terms of g.v cancel.
/// Throws NumericalError when `fn` produces a non-finite value.
double gradient_check(const ScalarFunction<double>& fn, const std::vector<Tensor<double>>& point,
                      Rng& rng, const GradCheckOptions& options = {});

/// Same check where the analytic gradient comes from the single-precision
/// `fn` and the finite differences from the double-precision `reference`
/// evaluated at the same point.
double gradient_check_single(const ScalarFunction<float>& fn,
                             const ScalarFunction<double>& reference,
                             const std::vector<Tensor<double>>& point, Rng& rng,
                             const GradCheckOptions& options = {});

}  // namespace edgerec::numeric
