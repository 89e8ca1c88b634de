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

// Integer log2 / exp2 in Q16. Everything the decoder derives from transmitted
// parameters goes through these so that probability tables are identical on
// every platform.

#ifndef LFMRP_FIXED_MATH_HPP
#define LFMRP_FIXED_MATH_HPP

#include <array>
#include <bit>
#include <cstdint>

namespace lfmrp::fixed {

inline constexpr int kFrac = 16;
inline constexpr std::int64_t kOne = std::int64_t{1} << kFrac;

/// log2(x) in Q16 for integer x > 0.
constexpr std::int64_t log2_q16(std::uint64_t x) {
  const int n = std::bit_width(x) - 1;
  // y in Q31, 1 <= y < 2
  std::uint64_t y = n <= 31 ? x << (31 - n) : x >> (n - 31);
  std::int64_t frac = 0;
  for (int i = 1; i <= kFrac; ++i) {
    y = (y * y) >> 31;
    if (y >= (std::uint64_t{1} << 32)) {
      y >>= 1;
      frac |= std::int64_t{1} << (kFrac - i);
    }
  }
  return (std::int64_t{n} << kFrac) | frac;
}

// round(2^(2^-i) * 2^30), i = 1..16
inline constexpr std::array<std::uint64_t, 16> kExp2Steps = {
    1518500250, 1276901417, 1170923762, 1121280436, 1097253708, 1085434106,
    1079572136, 1076653033, 1075196443, 1074468888, 1074105294, 1073923544,
    1073832680, 1073787251, 1073764537, 1073753181};

/// 2^y for y in Q16, returned in Q(out_frac). Saturates at 2^62.
constexpr std::uint64_t exp2_q(std::int64_t y, int out_frac) {
  std::int64_t n = y >> kFrac;  // floor
  const std::int64_t f = y - (n << kFrac);
  std::uint64_t r = std::uint64_t{1} << 30;
  for (int i = 1; i <= kFrac; ++i)
    if (f & (std::int64_t{1} << (kFrac - i))) r = (r * kExp2Steps[i - 1]) >> 30;
  const std::int64_t shift = n + out_frac - 30;
  if (shift >= 0) {
    if (shift >= 31) return std::uint64_t{1} << 62;
    return r << shift;
  }
  if (shift <= -63) return 0;
  return r >> (-shift);
}

inline constexpr std::int64_t kLog2E = 94548;        // log2(e) in Q16
inline constexpr std::int64_t kLog2SigmaMin = -107732;  // log2(0.32) in Q16

}  // namespace lfmrp::fixed

#endif  // LFMRP_FIXED_MATH_HPP
