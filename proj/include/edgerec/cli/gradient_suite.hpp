#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace edgerec::cli {

struct GradCaseResult {
  std::string name;
  double error_double = 0.0;
  double error_single = 0.0;
  bool passed = false;
};

inline constexpr double kGradTolDouble = 1e-6;
inline constexpr double kGradTolSingle = 1e-4;

/// Finite-difference checks of every differentiable primitive, each model
/// sub-layer, the full one-block model on a 4x4 patch and the training loss.
std::vector<GradCaseResult> run_gradient_suite(std::uint64_t seed = 7);

}  // namespace edgerec::cli
