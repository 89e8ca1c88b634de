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

#ifndef LFMRP_PREPROCESS_HPP
#define LFMRP_PREPROCESS_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lfmrp/lightfield.hpp"

namespace lfmrp {

/// One colour plane in the coding domain: unsigned samples in [0, alphabet).
struct Plane {
  Dims4 dims;
  std::int32_t alphabet = 0;
  std::vector<std::int32_t> samples;
};

struct Ycc {
  std::int32_t y;
  std::int32_t cu;
  std::int32_t cv;
  bool operator==(const Ycc&) const = default;
};

struct Rgb {
  std::int32_t r;
  std::int32_t g;
  std::int32_t b;
  bool operator==(const Rgb&) const = default;
};

// Reversible colour transform. Chroma is signed here; the codec offsets it by
// 2^bit_depth before coding.
constexpr Ycc rct_forward(std::int32_t r, std::int32_t g, std::int32_t b) {
  return {(r + 2 * g + b) >> 2, b - g, r - g};
}

constexpr Rgb rct_inverse(std::int32_t y, std::int32_t cu, std::int32_t cv) {
  const std::int32_t g = y - ((cu + cv) >> 2);  // arithmetic shift == floor
  return {cv + g, g, cu + g};
}

/// Sorted distinct sample values of a plane.
class PackTable {
 public:
  PackTable() = default;
  explicit PackTable(std::vector<std::int32_t> values);

  std::span<const std::int32_t> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  std::int32_t value_of_index(std::int32_t i) const { return values_[i]; }
  /// Index of a listed value; throws for values not in the table.
  std::int32_t index_of_value(std::int32_t v) const;

  bool operator==(const PackTable&) const = default;

 private:
  std::vector<std::int32_t> values_;
};

std::pair<std::vector<std::int32_t>, PackTable> pack_histogram(
    std::span<const std::int32_t> plane);
std::vector<std::int32_t> unpack_histogram(std::span<const std::int32_t> packed,
                                           const PackTable& table);

/// Sum of |x[i] - x[i-1]| over raster-consecutive samples inside each SAI.
std::uint64_t total_variation(std::span<const std::int32_t> plane,
                              std::size_t sai_size);

/// True iff packing strictly lowers total variation.
bool should_pack(std::span<const std::int32_t> plane, std::size_t sai_size);

}  // namespace lfmrp

#endif  // LFMRP_PREPROCESS_HPP
