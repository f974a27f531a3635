#include "edgerec/xform/scaler.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <map>

#include "edgerec/common/error.hpp"

namespace edgerec::xform {

double probit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw RangeError("probit argument must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

QuantileMap fit_quantile(std::span<const double> train_ratings) {
  std::map<double, std::size_t> counts;
  for (double r : train_ratings) {
    if (!std::isfinite(r)) throw RangeError("non-finite rating in quantile fit");
    ++counts[r];
  }
  if (counts.size() < 2) {
    throw ParameterError("quantile transform needs at least two distinct rating levels");
  }
  const double total = static_cast<double>(train_ratings.size());
  QuantileMap map;
  double cumulative = 0.0;
  for (const auto& [level, count] : counts) {
    cumulative += static_cast<double>(count);
    double rank = (cumulative - static_cast<double>(count) / 2.0) / total;
    map.levels.push_back(level);
    map.midpoint_ranks.push_back(rank);
    map.gaussian_values.push_back(probit(rank));
  }
  return map;
}

double quantile_apply(double rating, const QuantileMap& map) {
  auto it = std::lower_bound(map.levels.begin(), map.levels.end(), rating);
  if (it == map.levels.end() || *it != rating) {
    throw RangeError("rating " + std::to_string(rating) + " is not a fitted quantile level");
  }
  return map.gaussian_values[static_cast<std::size_t>(it - map.levels.begin())];
}

double quantile_invert(double z, const QuantileMap& map) {
  if (!std::isfinite(z)) throw RangeError("quantile_invert: non-finite value");
  const auto& g = map.gaussian_values;
  auto it = std::lower_bound(g.begin(), g.end(), z);
  if (it == g.begin()) return map.levels.front();
  if (it == g.end()) return map.levels.back();
  auto hi = static_cast<std::size_t>(it - g.begin());
  std::size_t lo = hi - 1;
  // Equal distance resolves to the lower level.
  return (z - g[lo] <= g[hi] - z) ? map.levels[lo] : map.levels[hi];
}

std::string to_string(TransformMode mode) {
  return mode == TransformMode::linear ? "linear" : "quantile";
}

TransformMode parse_transform_mode(const std::string& text) {
  if (text == "linear") return TransformMode::linear;
  if (text == "quantile") return TransformMode::quantile;
  throw ParameterError("unknown transform '" + text + "' (expected linear or quantile)");
}

double scale_rating(double rating, double r_min, double r_max) {
  if (!(rating >= r_min && rating <= r_max)) {
    throw RangeError("rating " + std::to_string(rating) + " outside scale [" +
                     std::to_string(r_min) + ", " + std::to_string(r_max) + "]");
  }
  return 2.0 * (rating - r_min) / (r_max - r_min) - 1.0;
}

double unscale_rating(double value, double r_min, double r_max) {
  double w = std::clamp(value, -1.0, 1.0);
  return (w + 1.0) * (r_max - r_min) / 2.0 + r_min;
}

RatingScaler RatingScaler::linear(double r_min, double r_max) {
  if (!(r_min < r_max)) throw ParameterError("rating scale requires r_min < r_max");
  RatingScaler s;
  s.mode_ = TransformMode::linear;
  s.r_min_ = r_min;
  s.r_max_ = r_max;
  return s;
}

RatingScaler RatingScaler::quantile(double r_min, double r_max, QuantileMap map) {
  RatingScaler s = linear(r_min, r_max);
  s.mode_ = TransformMode::quantile;
  s.map_ = std::move(map);
  return s;
}

double RatingScaler::scale(double rating) const {
  if (mode_ == TransformMode::quantile) {
    if (!(rating >= r_min_ && rating <= r_max_)) {
      throw RangeError("rating " + std::to_string(rating) + " outside the rating scale");
    }
    return quantile_apply(rating, *map_);
  }
  return scale_rating(rating, r_min_, r_max_);
}

double RatingScaler::unscale(double value, double snap_step) const {
  if (mode_ == TransformMode::quantile) return quantile_invert(value, *map_);
  double r = unscale_rating(value, r_min_, r_max_);
  if (snap_step > 0.0) {
    r = r_min_ + std::round((r - r_min_) / snap_step) * snap_step;
    r = std::clamp(r, r_min_, r_max_);
  }
  return r;
}

std::pair<double, double> RatingScaler::value_range() const {
  if (mode_ == TransformMode::quantile) {
    return {map_->gaussian_values.front(), map_->gaussian_values.back()};
  }
  return {-1.0, 1.0};
}

nlohmann::json to_json(const RatingScaler& scaler) {
  nlohmann::json j;
  j["mode"] = to_string(scaler.mode());
  j["r_min"] = scaler.r_min();
  j["r_max"] = scaler.r_max();
  if (scaler.quantile_map()) {
    const auto& m = *scaler.quantile_map();
    j["quantile"] = {{"levels", m.levels},
                     {"midpoint_ranks", m.midpoint_ranks},
                     {"gaussian_values", m.gaussian_values}};
  }
  return j;
}

RatingScaler scaler_from_json(const nlohmann::json& j) {
  auto mode = parse_transform_mode(j.at("mode").get<std::string>());
  double r_min = j.at("r_min").get<double>();
  double r_max = j.at("r_max").get<double>();
  if (mode == TransformMode::linear) return RatingScaler::linear(r_min, r_max);
  QuantileMap m;
  const auto& q = j.at("quantile");
  m.levels = q.at("levels").get<std::vector<double>>();
  m.midpoint_ranks = q.at("midpoint_ranks").get<std::vector<double>>();
  m.gaussian_values = q.at("gaussian_values").get<std::vector<double>>();
  return RatingScaler::quantile(r_min, r_max, std::move(m));
}

}  // namespace edgerec::xform
