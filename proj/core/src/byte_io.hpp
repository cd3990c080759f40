#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "maploc/file_io.hpp"

namespace maploc::detail {

template <typename U>
void put_le(std::vector<std::byte>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
  }
}

inline void put_f32(std::vector<std::byte>& out, float v) {
  put_le(out, std::bit_cast<std::uint32_t>(v));
}

inline void put_f64(std::vector<std::byte>& out, double v) {
  put_le(out, std::bit_cast<std::uint64_t>(v));
}

template <typename U>
U get_le(std::span<const std::byte> in, std::size_t offset) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(std::to_integer<std::uint8_t>(in[offset + i])) << (8 * i);
  }
  return v;
}

inline float get_f32(std::span<const std::byte> in, std::size_t offset) {
  return std::bit_cast<float>(get_le<std::uint32_t>(in, offset));
}

inline double get_f64(std::span<const std::byte> in, std::size_t offset) {
  return std::bit_cast<double>(get_le<std::uint64_t>(in, offset));
}

}  // namespace maploc::detail
