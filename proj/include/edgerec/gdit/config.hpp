#pragma once

#include <cstddef>

#include <json.hpp>

namespace edgerec::gdit {

struct GDiTConfig {
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t n_blocks = 1;
  std::size_t mlp_ratio = 4;
  std::size_t d_user_in = 1;
  std::size_t d_item_in = 1;

  /// ParameterError unless d_model is even and divisible by n_heads, and
  /// every count is positive.
  void validate() const;

  bool operator==(const GDiTConfig&) const = default;
};

nlohmann::json to_json(const GDiTConfig& config);
GDiTConfig gdit_config_from_json(const nlohmann::json& j);

}  // namespace edgerec::gdit
