// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
//
// Little-endian primitives for the binary formats.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace mobgen::le {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

inline std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) |
           (v >> 24);
  }
  return v;
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const std::uint32_t le = to_le(v);
  out.write(reinterpret_cast<const char*>(&le), 4);
}

inline void put_f32(std::ostream& out, float f) {
  put_u32(out, std::bit_cast<std::uint32_t>(f));
}

inline bool get_u32(std::istream& in, std::uint32_t* v) {
  std::uint32_t raw;
  if (!in.read(reinterpret_cast<char*>(&raw), 4)) return false;
  *v = to_le(raw);
  return true;
}

inline bool get_f32(std::istream& in, float* f) {
  std::uint32_t bits;
  if (!get_u32(in, &bits)) return false;
  *f = std::bit_cast<float>(bits);
  return true;
}

}  // namespace mobgen::le
