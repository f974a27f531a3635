#include "edgerec/diffusion/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "edgerec/common/error.hpp"

namespace edgerec::diffusion {

NoiseSchedule NoiseSchedule::linear(int steps, double beta_start, double beta_end) {
  if (steps < 1) throw ParameterError("schedule needs at least one step");
  if (!(beta_start > 0.0) || beta_start > beta_end || !(beta_end < 1.0)) {
    throw ParameterError("linear schedule requires 0 < beta_start <= beta_end < 1");
  }
  std::vector<double> betas(static_cast<std::size_t>(steps));
  for (int t = 1; t <= steps; ++t) {
    double frac = steps == 1 ? 0.0 : static_cast<double>(t - 1) / (steps - 1);
    betas[t - 1] = beta_start + frac * (beta_end - beta_start);
  }
  betas.back() = beta_end;
  return from_betas(std::move(betas), "linear");
}

NoiseSchedule NoiseSchedule::cosine(int steps) {
  if (steps < 1) throw ParameterError("schedule needs at least one step");
  constexpr double s = 0.008;
  auto f = [&](double t) {
    double c = std::cos((t / steps + s) / (1.0 + s) * std::numbers::pi / 2.0);
    return c * c;
  };
  std::vector<double> betas(static_cast<std::size_t>(steps));
  for (int t = 1; t <= steps; ++t) betas[t - 1] = std::min(1.0 - f(t) / f(t - 1), 0.999);
  return from_betas(std::move(betas), "cosine");
}

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas, std::string kind) {
  if (betas.empty()) throw ParameterError("schedule needs at least one step");
  for (double b : betas) {
    if (!(b > 0.0 && b < 1.0)) throw ParameterError("every beta must lie in (0, 1)");
  }
  NoiseSchedule s;
  s.kind_ = std::move(kind);
  s.beta_ = std::move(betas);
  std::size_t n = s.beta_.size();
  s.alpha_.resize(n);
  s.alpha_bar_.resize(n + 1);
  s.beta_tilde_.resize(n);
  s.alpha_bar_[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    s.alpha_[i] = 1.0 - s.beta_[i];
    s.alpha_bar_[i + 1] = s.alpha_bar_[i] * s.alpha_[i];
    s.beta_tilde_[i] = (1.0 - s.alpha_bar_[i]) / (1.0 - s.alpha_bar_[i + 1]) * s.beta_[i];
  }
  return s;
}

namespace {
void check_step(int t, int steps) {
  if (t < 1 || t > steps) {
    throw ParameterError("diffusion step " + std::to_string(t) + " outside [1, " +
                         std::to_string(steps) + "]");
  }
}
}  // namespace

double NoiseSchedule::beta(int t) const {
  check_step(t, steps());
  return beta_[t - 1];
}

double NoiseSchedule::alpha(int t) const {
  check_step(t, steps());
  return alpha_[t - 1];
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t > steps()) check_step(t, steps());
  return alpha_bar_[t];
}

double NoiseSchedule::beta_tilde(int t) const {
  check_step(t, steps());
  return beta_tilde_[t - 1];
}

double forward_sample_at(double x0, double alpha_bar, double eps) {
  return std::sqrt(alpha_bar) * x0 + std::sqrt(1.0 - alpha_bar) * eps;
}

std::vector<double> forward_sample(std::span<const double> x0, int t, std::span<const double> eps,
                                   const NoiseSchedule& schedule) {
  if (x0.size() != eps.size()) throw ShapeError("forward_sample: noise shape differs from x0");
  double ab = schedule.alpha_bar(t);
  if (t < 1) throw ParameterError("forward_sample: t must be >= 1");
  std::vector<double> out(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) out[i] = forward_sample_at(x0[i], ab, eps[i]);
  return out;
}

Posterior posterior_params(std::span<const double> x0, std::span<const double> x_t, int t,
                           const NoiseSchedule& schedule) {
  if (x0.size() != x_t.size()) throw ShapeError("posterior_params: x0 and x_t differ in shape");
  if (t < 1) throw ParameterError("posterior undefined for t < 1");
  double ab_t = schedule.alpha_bar(t);
  double ab_prev = schedule.alpha_bar(t - 1);
  double c0 = std::sqrt(ab_prev) * schedule.beta(t) / (1.0 - ab_t);
  double ct = std::sqrt(schedule.alpha(t)) * (1.0 - ab_prev) / (1.0 - ab_t);
  Posterior post;
  post.mean.resize(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) post.mean[i] = c0 * x0[i] + ct * x_t[i];
  post.variance = schedule.beta_tilde(t);
  return post;
}

std::vector<double> predict_x0(std::span<const double> x_t, std::span<const double> eps_hat, int t,
                               const NoiseSchedule& schedule, bool clamp) {
  if (x_t.size() != eps_hat.size()) throw ShapeError("predict_x0: shape mismatch");
  double ab = schedule.alpha_bar(t);
  if (t < 1) throw ParameterError("predict_x0: t must be >= 1");
  double s_noise = std::sqrt(1.0 - ab);
  double s_signal = std::sqrt(ab);
  std::vector<double> out(x_t.size());
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    double v = (x_t[i] - s_noise * eps_hat[i]) / s_signal;
    out[i] = clamp ? std::clamp(v, -1.0, 1.0) : v;
  }
  return out;
}

}  // namespace edgerec::diffusion
