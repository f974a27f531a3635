#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace edgerec::xform {

/// Empirical midpoint-rank CDF of discrete rating levels pushed through the
/// standard normal quantile function.
struct QuantileMap {
  std::vector<double> levels;          // sorted, distinct
  std::vector<double> midpoint_ranks;  // (cumulative - count / 2) / N
  std::vector<double> gaussian_values; // probit(midpoint_ranks)
};

/// Throws ParameterError when fewer than two distinct levels are present.
QuantileMap fit_quantile(std::span<const double> train_ratings);
/// Throws RangeError when `rating` is not one of the fitted levels.
double quantile_apply(double rating, const QuantileMap& map);
/// Level whose Gaussian value is nearest to `z`; ties go to the lower level.
double quantile_invert(double z, const QuantileMap& map);

/// Standard normal quantile function.
double probit(double p);

enum class TransformMode { linear, quantile };

std::string to_string(TransformMode mode);
TransformMode parse_transform_mode(const std::string& text);

class RatingScaler {
 public:
  static RatingScaler linear(double r_min, double r_max);
  static RatingScaler quantile(double r_min, double r_max, QuantileMap map);

  TransformMode mode() const { return mode_; }
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  const std::optional<QuantileMap>& quantile_map() const { return map_; }

  /// Rating on the original scale -> diffusion value. RangeError outside the scale.
  double scale(double rating) const;
  /// Diffusion value -> rating. Overshoot is clamped to the value range first.
  /// With `snap_step` > 0 the result is rounded to the nearest multiple above r_min.
  double unscale(double value, double snap_step = 0.0) const;
  /// Interval that diffusion values occupy: [-1, 1] for linear mode.
  std::pair<double, double> value_range() const;

 private:
  TransformMode mode_ = TransformMode::linear;
  double r_min_ = 1.0;
  double r_max_ = 5.0;
  std::optional<QuantileMap> map_;
};

/// w = 2 (r - r_min) / (r_max - r_min) - 1.
double scale_rating(double rating, double r_min, double r_max);
/// Inverse of scale_rating after clamping w to [-1, 1].
double unscale_rating(double value, double r_min, double r_max);

nlohmann::json to_json(const RatingScaler& scaler);
RatingScaler scaler_from_json(const nlohmann::json& j);

}  // namespace edgerec::xform
