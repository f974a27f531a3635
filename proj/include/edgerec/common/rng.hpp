#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

namespace edgerec {

using Rng = std::mt19937_64;

/// Independent generator derived from a base seed and a list of tags
/// (purpose, step, tile index, ...). The same tags always give the same stream.
Rng derive_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

/// First tag of each independent stream family.
namespace stream {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t train = 2;
inline constexpr std::uint64_t prior = 3;
inline constexpr std::uint64_t reverse = 4;
inline constexpr std::uint64_t overwrite = 5;
inline constexpr std::uint64_t tiling = 6;
inline constexpr std::uint64_t eval = 7;
}  // namespace stream

double standard_normal(Rng& rng);

std::string serialize_rng(const Rng& rng);
Rng deserialize_rng(const std::string& state);

}  // namespace edgerec
