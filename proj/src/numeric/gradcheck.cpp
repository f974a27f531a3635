#include "edgerec/numeric/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edgerec/common/error.hpp"

namespace edgerec::numeric {

namespace {

double evaluate(const ScalarFunction<double>& fn, const std::vector<Tensor<double>>& point) {
  std::vector<Var<double>> inputs;
  inputs.reserve(point.size());
  for (const auto& t : point) inputs.push_back(Var<double>::constant(t));
  double value = fn(inputs).value().item();
  if (!std::isfinite(value)) throw NumericalError("gradient_check: non-finite function value");
  return value;
}

template <typename Real>
std::vector<Tensor<double>> analytic_gradient(const ScalarFunction<Real>& fn,
                                              const std::vector<Tensor<double>>& point) {
  std::vector<Var<Real>> inputs;
  inputs.reserve(point.size());
  for (const auto& t : point) inputs.push_back(Var<Real>::leaf(t.template cast<Real>()));
  Var<Real> out = fn(inputs);
  if (out.value().size() != 1) throw ShapeError("gradient_check: function must return a scalar");
  if (!std::isfinite(static_cast<double>(out.value().item()))) {
    throw NumericalError("gradient_check: non-finite function value");
  }
  out.backward();
  std::vector<Tensor<double>> grads;
  grads.reserve(inputs.size());
  for (const auto& in : inputs) grads.push_back(in.grad().template cast<double>());
  return grads;
}

double check(const std::vector<Tensor<double>>& grads, const ScalarFunction<double>& reference,
             const std::vector<Tensor<double>>& point, Rng& rng, const GradCheckOptions& options) {
  double scale = 1.0;
  for (const auto& t : point)
    for (double v : t.data()) scale = std::max(scale, std::abs(v));
  const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * scale;
  const double f0 = evaluate(reference, point);
  const double floor = options.abs_floor * (1.0 + std::abs(f0));

  double worst = 0.0;
  for (int d = 0; d < options.directions; ++d) {
    std::vector<Tensor<double>> direction;
    double norm = 0.0;
    for (const auto& t : point) {
      Tensor<double> v(t.shape());
      for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = standard_normal(rng);
        norm = std::max(norm, std::abs(v[i]));
      }
      direction.push_back(std::move(v));
    }
    if (norm == 0.0) continue;

    double analytic = 0.0, spread = 0.0;
    auto plus = point;
    auto minus = point;
    for (std::size_t k = 0; k < point.size(); ++k) {
      for (std::size_t i = 0; i < point[k].size(); ++i) {
        double v = direction[k][i] / norm;
        analytic += grads[k][i] * v;
        spread += std::abs(grads[k][i] * v);
        plus[k][i] += h * v;
        minus[k][i] -= h * v;
      }
    }
    double numeric = (evaluate(reference, plus) - evaluate(reference, minus)) / (2.0 * h);
    double magnitude = std::max(spread, std::abs(numeric));
    if (magnitude <= floor) continue;
    worst = std::max(worst, std::abs(analytic - numeric) / magnitude);
  }
  return worst;
}

}  // namespace

double gradient_check(const ScalarFunction<double>& fn, const std::vector<Tensor<double>>& point,
                      Rng& rng, const GradCheckOptions& options) {
  return check(analytic_gradient<double>(fn, point), fn, point, rng, options);
}

double gradient_check_single(const ScalarFunction<float>& fn, const ScalarFunction<double>& reference,
                             const std::vector<Tensor<double>>& point, Rng& rng,
                             const GradCheckOptions& options) {
  // Round the point through float so both paths see identical inputs.
  std::vector<Tensor<double>> rounded;
  rounded.reserve(point.size());
  for (const auto& t : point) rounded.push_back(t.cast<float>().cast<double>());
  return check(analytic_gradient<float>(fn, rounded), reference, rounded, rng, options);
}

}  // namespace edgerec::numeric
