// Copyright 2026 The lfmrp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LFMRP_BITIO_HPP
#define LFMRP_BITIO_HPP

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "lfmrp/error.hpp"

namespace lfmrp {

/// MSB-first bit packer with Exp-Golomb helpers.
class BitWriter {
 public:
  void put(std::uint64_t value, int nbits) {
    for (int i = nbits - 1; i >= 0; --i) put_bit((value >> i) & 1u);
  }
  void put_bit(unsigned bit) {
    if (used_ == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> used_);
    used_ = (used_ + 1) & 7;
    ++bits_;
  }
  /// Order-0 Exp-Golomb.
  void put_ue(std::uint64_t x) {
    const int n = std::bit_width(x + 1);
    put(0, n - 1);
    put(x + 1, n);
  }
  void put_se(std::int64_t x) {
    put_ue(x > 0 ? 2 * static_cast<std::uint64_t>(x) - 1
                 : 2 * static_cast<std::uint64_t>(-x));
  }

  std::uint64_t bit_count() const { return bits_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  static int ue_length(std::uint64_t x) { return 2 * std::bit_width(x + 1) - 1; }
  static int se_length(std::int64_t x) {
    return ue_length(x > 0 ? 2 * static_cast<std::uint64_t>(x) - 1
                           : 2 * static_cast<std::uint64_t>(-x));
  }

 private:
  std::vector<std::uint8_t> bytes_;
  int used_ = 0;
  std::uint64_t bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  unsigned get_bit() {
    if (pos_ >= bytes_.size() * 8) fail(ErrorKind::kIntegrity, "bit reader overrun");
    const unsigned bit = (bytes_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1u;
    ++pos_;
    return bit;
  }
  std::uint64_t get(int nbits) {
    std::uint64_t x = 0;
    for (int i = 0; i < nbits; ++i) x = (x << 1) | get_bit();
    return x;
  }
  std::uint64_t get_ue() {
    int zeros = 0;
    while (get_bit() == 0) {
      if (++zeros > 62) fail(ErrorKind::kIntegrity, "Exp-Golomb code too long");
    }
    return ((std::uint64_t{1} << zeros) | get(zeros)) - 1;
  }
  std::int64_t get_se() {
    const std::uint64_t k = get_ue();
    return (k & 1) ? static_cast<std::int64_t>((k + 1) / 2)
                   : -static_cast<std::int64_t>(k / 2);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

/// Byte-level cursor for the container and header fields.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const auto x = static_cast<std::uint16_t>(bytes_[pos_] | bytes_[pos_ + 1] << 8);
    pos_ += 2;
    return x;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return x;
  }
  std::uint64_t varint() {
    std::uint64_t x = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      const std::uint8_t b = u8();
      x |= std::uint64_t{b & 0x7fu} << shift;
      if (!(b & 0x80)) return x;
    }
    fail(ErrorKind::kIntegrity, "varint too long");
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail(ErrorKind::kIntegrity, "truncated bitstream");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline void put_u8(std::vector<std::uint8_t>& out, std::uint32_t x) {
  out.push_back(static_cast<std::uint8_t>(x));
}
inline void put_u16(std::vector<std::uint8_t>& out, std::uint32_t x) {
  out.push_back(static_cast<std::uint8_t>(x));
  out.push_back(static_cast<std::uint8_t>(x >> 8));
}
inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}
inline void put_varint(std::vector<std::uint8_t>& out, std::uint64_t x) {
  while (x >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(x | 0x80));
    x >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(x));
}

}  // namespace lfmrp

#endif  // LFMRP_BITIO_HPP
