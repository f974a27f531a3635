#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace edgerec {

// Little-endian array encoding for on-disk payloads.

template <typename T>
void append_le(std::string& out, std::span<const T> values) {
  static_assert(std::is_arithmetic_v<T>);
  std::size_t start = out.size();
  out.resize(start + values.size() * sizeof(T));
  char* dst = out.data() + start;
  for (const T& v : values) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    std::memcpy(dst, bytes, sizeof(T));
    dst += sizeof(T);
  }
}

template <typename T>
std::vector<T> read_le(const char* src, std::size_t count) {
  static_assert(std::is_arithmetic_v<T>);
  std::vector<T> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, src + k * sizeof(T), sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    std::memcpy(&out[k], bytes, sizeof(T));
  }
  return out;
}

}  // namespace edgerec
