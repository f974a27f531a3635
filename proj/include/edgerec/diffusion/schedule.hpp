#pragma once

#include <span>
#include <string>
#include <vector>

namespace edgerec::diffusion {

/// Noise tables for steps t = 1..T. Index 0 of alpha_bar is the empty
/// product (1.0), so alpha_bar(0) is valid while beta(0) is not.
class NoiseSchedule {
 public:
  /// beta_t interpolated linearly from beta_start (t=1) to beta_end (t=T).
  static NoiseSchedule linear(int steps, double beta_start, double beta_end);
  /// Squared-cosine alpha_bar with offset 0.008, betas capped at 0.999.
  static NoiseSchedule cosine(int steps);
  static NoiseSchedule from_betas(std::vector<double> betas, std::string kind = "custom");

  int steps() const { return static_cast<int>(beta_.size()); }
  const std::string& kind() const { return kind_; }
  const std::vector<double>& betas() const { return beta_; }

  double beta(int t) const;
  double alpha(int t) const;
  double alpha_bar(int t) const;
  double beta_tilde(int t) const;

 private:
  std::string kind_;
  std::vector<double> beta_;
  std::vector<double> alpha_;
  std::vector<double> alpha_bar_;   // alpha_bar_[0] = 1
  std::vector<double> beta_tilde_;
};

/// sqrt(alpha_bar) * x0 + sqrt(1 - alpha_bar) * eps for one value.
double forward_sample_at(double x0, double alpha_bar, double eps);

/// Closed-form q(x_t | x_0) draw with the supplied noise.
std::vector<double> forward_sample(std::span<const double> x0, int t, std::span<const double> eps,
                                   const NoiseSchedule& schedule);

struct Posterior {
  std::vector<double> mean;
  double variance = 0.0;
};

/// Mean and variance of q(x_{t-1} | x_t, x_0).
Posterior posterior_params(std::span<const double> x0, std::span<const double> x_t, int t,
                           const NoiseSchedule& schedule);

/// x0 reconstructed from an epsilon prediction, optionally clamped to [-1, 1].
std::vector<double> predict_x0(std::span<const double> x_t, std::span<const double> eps_hat, int t,
                               const NoiseSchedule& schedule, bool clamp = true);

}  // namespace edgerec::diffusion
