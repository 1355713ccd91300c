// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fdbeam::detail {

// Little-endian scalar encoding independent of the host byte order.

inline void write_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(bytes, 8);
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(bytes, 4);
}

inline void write_u16(std::ostream& out, std::uint16_t v) {
  const char bytes[2] = {static_cast<char>(v & 0xffu), static_cast<char>((v >> 8) & 0xffu)};
  out.write(bytes, 2);
}

inline void write_i32(std::ostream& out, std::int32_t v) { write_u32(out, static_cast<std::uint32_t>(v)); }
inline void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void read_exact(std::istream& in, char* dst, std::size_t n, const char* what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw std::runtime_error(std::string("truncated file while reading ") + what);
}

inline std::uint64_t read_u64(std::istream& in, const char* what) {
  unsigned char bytes[8];
  read_exact(in, reinterpret_cast<char*>(bytes), 8, what);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

inline std::uint32_t read_u32(std::istream& in, const char* what) {
  unsigned char bytes[4];
  read_exact(in, reinterpret_cast<char*>(bytes), 4, what);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

inline std::uint16_t read_u16(std::istream& in, const char* what) {
  unsigned char bytes[2];
  read_exact(in, reinterpret_cast<char*>(bytes), 2, what);
  return static_cast<std::uint16_t>(bytes[0] | (bytes[1] << 8));
}

inline std::int32_t read_i32(std::istream& in, const char* what) {
  return static_cast<std::int32_t>(read_u32(in, what));
}

inline double read_f64(std::istream& in, const char* what) { return std::bit_cast<double>(read_u64(in, what)); }

// FNV-1a, 64 bit.
class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ull;
    }
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
    bytes(b, 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ull;
};

}  // namespace fdbeam::detail
