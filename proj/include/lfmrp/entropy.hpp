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

#ifndef LFMRP_ENTROPY_HPP
#define LFMRP_ENTROPY_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace lfmrp {

inline constexpr int kScaleBits = 15;
inline constexpr std::uint32_t kScale = 1u << kScaleBits;
/// Folded residuals at or above kMaxCodedSymbols - 1 are sent as an escape
/// symbol followed by raw bits.
inline constexpr std::int32_t kMaxCodedSymbols = 4096;
inline constexpr int kGroups = 16;
inline constexpr int kThresholds = kGroups - 1;

/// Generalised-Gaussian shape menu. Index 5 is the Gaussian.
inline constexpr std::array<double, 6> kShapeMenu = {0.6, 0.8, 1.0, 1.2, 1.6, 2.0};
inline constexpr int kShapeCount = static_cast<int>(kShapeMenu.size());
inline constexpr int kGaussianShape = 5;

/// Maps sample `value` to a non-negative symbol by interleaving residuals
/// around `prediction` (0, +1, -1, +2, -2, ...) and continuing on the longer
/// side once the shorter one runs out of legal samples.
std::uint32_t fold_residual(std::int32_t value, std::int32_t prediction,
                            std::int32_t alphabet);
std::int32_t unfold_residual(std::uint32_t symbol, std::int32_t prediction,
                             std::int32_t alphabet);

/// Byte-oriented range coder (32-bit range, 64-bit low with carry
/// propagation). The leading always-zero byte and trailing zero bytes are
/// dropped; the decoder reads zeros past the end.
class RangeEncoder {
 public:
  void encode(std::uint32_t cum, std::uint32_t freq, std::uint32_t total);
  void encode_bits(std::uint32_t value, int nbits);
  std::vector<std::uint8_t> finish();

 private:
  void shift_low();

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> bytes);

  /// Returns the cumulative target for `total`; follow with consume().
  std::uint32_t target(std::uint32_t total);
  void consume(std::uint32_t cum, std::uint32_t freq);
  std::uint32_t decode_bits(int nbits);

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t step_ = 0;
};

/// Discretised generalised-Gaussian table over folded residual symbols,
/// cumulative counts summing to kScale with every symbol count >= 1.
class GroupModel {
 public:
  /// Table for the given residual variance (floored at 0.1).
  static GroupModel build(double variance, int shape_index, std::int32_t alphabet);
  /// Integer-only construction from log2(sigma) in Q16.
  static GroupModel from_log2_sigma(std::int64_t log2_sigma_q16, int shape_index,
                                    std::int32_t alphabet);

  std::int32_t alphabet() const { return alphabet_; }
  std::int32_t coded_symbols() const { return static_cast<std::int32_t>(cum_.size()) - 1; }
  bool has_escape() const { return escape_bits_ > 0; }
  std::uint32_t freq(std::uint32_t coded) const { return cum_[coded + 1] - cum_[coded]; }
  std::uint32_t cum(std::uint32_t coded) const { return cum_[coded]; }

  /// Code length in bits of folded symbol `symbol`, escape bits included.
  double cost(std::uint32_t symbol) const {
    const auto c = std::min<std::uint32_t>(symbol, coded_symbols() - 1);
    return cost_[c] + (symbol >= static_cast<std::uint32_t>(coded_symbols() - 1) && has_escape()
                           ? escape_bits_
                           : 0);
  }

  void encode(RangeEncoder& enc, std::uint32_t symbol) const;
  std::uint32_t decode(RangeDecoder& dec) const;

  /// Probability of each coded symbol.
  std::vector<double> pmf() const;

 private:
  std::int32_t alphabet_ = 0;
  int escape_bits_ = 0;
  std::vector<std::uint32_t> cum_;
  std::vector<double> cost_;
};

/// All 16 x 6 group tables for one plane alphabet. Group n has a fixed
/// standard deviation spaced geometrically from 0.32 to alphabet / 4.
class GroupModelBank {
 public:
  explicit GroupModelBank(std::int32_t alphabet);

  const GroupModel& at(int group, int shape) const {
    return models_[static_cast<std::size_t>(group * kShapeCount + shape)];
  }
  std::int32_t alphabet() const { return alphabet_; }

  static std::int64_t group_log2_sigma(int group, std::int32_t alphabet);

 private:
  std::int32_t alphabet_;
  std::vector<GroupModel> models_;
};

/// Frequency-count model for small alphabets (class ranks).
class AdaptiveModel {
 public:
  explicit AdaptiveModel(int symbols);

  double cost(int symbol) const;
  void encode(RangeEncoder& enc, int symbol);
  int decode(RangeDecoder& dec);
  int symbols() const { return static_cast<int>(counts_.size()); }
  /// Adapts to `symbol` without coding it (cost simulation).
  void update(int symbol);

 private:
  std::vector<std::uint32_t> counts_;
  std::uint32_t total_ = 0;
};

/// Fixed-probability binary / ternary coding on a kScale grid.
void encode_with_freqs(RangeEncoder& enc, std::span<const std::uint32_t> freqs, int symbol);
int decode_with_freqs(RangeDecoder& dec, std::span<const std::uint32_t> freqs);

}  // namespace lfmrp

#endif  // LFMRP_ENTROPY_HPP
