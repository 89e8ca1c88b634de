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

#include "lfmrp/entropy.hpp"

#include <bit>
#include <cassert>
#include <cmath>
#include <cstdlib>

#include "lfmrp/error.hpp"
#include "lfmrp/fixed_math.hpp"

namespace lfmrp {

namespace {

constexpr std::uint32_t kTop = 1u << 24;

// log2 of sqrt(Gamma(1/b) / Gamma(3/b)) in Q16, turning sigma into the
// generalised-Gaussian scale.
constexpr std::array<std::int64_t, kShapeCount> kShapeLog2Factor = {
    -155077, -74934, -32768, -7731, 19312, 32768};
// Shape exponent in fifths.
constexpr std::array<std::int64_t, kShapeCount> kShapeFifths = {3, 4, 5, 6, 8, 10};

}  // namespace

std::uint32_t fold_residual(std::int32_t value, std::int32_t prediction,
                            std::int32_t alphabet) {
  const std::int32_t e = value - prediction;
  const std::int32_t r = std::min(prediction, alphabet - 1 - prediction);
  if (std::abs(e) <= r) return e > 0 ? 2u * e - 1u : static_cast<std::uint32_t>(-2 * e);
  return e > 0 ? static_cast<std::uint32_t>(e + r) : static_cast<std::uint32_t>(r - e);
}

std::int32_t unfold_residual(std::uint32_t symbol, std::int32_t prediction,
                             std::int32_t alphabet) {
  const std::int32_t r = std::min(prediction, alphabet - 1 - prediction);
  const auto f = static_cast<std::int64_t>(symbol);
  std::int64_t e;
  if (f <= 2 * std::int64_t{r}) {
    e = (f & 1) ? (f + 1) / 2 : -f / 2;
  } else if (prediction < alphabet - 1 - prediction) {
    e = f - r;
  } else {
    e = r - f;
  }
  return static_cast<std::int32_t>(prediction + e);
}

// ---------------------------------------------------------------------------

void RangeEncoder::shift_low() {
  if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t temp = cache_;
    do {
      out_.push_back(static_cast<std::uint8_t>(temp + carry));
      temp = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

void RangeEncoder::encode(std::uint32_t cum, std::uint32_t freq, std::uint32_t total) {
  assert(freq > 0 && cum + freq <= total);
  const std::uint32_t r = range_ / total;
  low_ += std::uint64_t{r} * cum;
  range_ = r * freq;
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::encode_bits(std::uint32_t value, int nbits) {
  while (nbits > 0) {
    const int k = std::min(nbits, 15);
    nbits -= k;
    encode((value >> nbits) & ((1u << k) - 1u), 1, 1u << k);
  }
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  // Settle on the value inside [low, low + range) with the most trailing zero
  // bits so the flushed tail is mostly zero bytes, which are then dropped.
  for (int k = 32; k >= 0; --k) {
    const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
    const std::uint64_t v = (low_ + mask) & ~mask;
    if (v < low_ + range_) {
      low_ = v;
      break;
    }
  }
  for (int i = 0; i < 5; ++i) shift_low();
  std::vector<std::uint8_t> out(out_.begin() + 1, out_.end());
  while (!out.empty() && out.back() == 0) out.pop_back();
  return out;
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  return pos_ < bytes_.size() ? bytes_[pos_++] : (++pos_, std::uint8_t{0});
}

std::uint32_t RangeDecoder::target(std::uint32_t total) {
  step_ = range_ / total;
  const std::uint32_t v = code_ / step_;
  if (v >= total) fail(ErrorKind::kIntegrity, "range decoder out of bounds");
  return v;
}

void RangeDecoder::consume(std::uint32_t cum, std::uint32_t freq) {
  code_ -= cum * step_;
  range_ = step_ * freq;
  while (range_ < kTop) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

std::uint32_t RangeDecoder::decode_bits(int nbits) {
  std::uint32_t value = 0;
  while (nbits > 0) {
    const int k = std::min(nbits, 15);
    nbits -= k;
    const std::uint32_t chunk = target(1u << k);
    consume(chunk, 1);
    value = (value << k) | chunk;
  }
  return value;
}

// ---------------------------------------------------------------------------

GroupModel GroupModel::from_log2_sigma(std::int64_t log2_sigma_q16, int shape_index,
                                       std::int32_t alphabet) {
  GroupModel g;
  g.alphabet_ = alphabet;
  const std::int32_t coded = std::min(alphabet, kMaxCodedSymbols);
  if (alphabet > kMaxCodedSymbols)
    g.escape_bits_ = std::bit_width(static_cast<std::uint32_t>(alphabet - kMaxCodedSymbols));

  const std::int64_t log2_scale = log2_sigma_q16 + kShapeLog2Factor[shape_index];
  const std::int64_t fifths = kShapeFifths[shape_index];
  auto weight = [&](std::uint32_t magnitude) -> std::uint64_t {
    if (magnitude == 0) return std::uint64_t{1} << 30;
    const std::int64_t lg = (fixed::log2_q16(magnitude) - log2_scale) * fifths / 5;
    const std::uint64_t t = fixed::exp2_q(lg, fixed::kFrac);  // (m / scale)^beta, Q16
    if (t >= (std::uint64_t{64} << fixed::kFrac)) return 0;
    const auto x = static_cast<std::int64_t>((t * fixed::kLog2E) >> fixed::kFrac);
    return fixed::exp2_q(-x, 30);
  };

  std::vector<std::uint64_t> w(static_cast<std::size_t>(coded));
  for (std::int32_t f = 0; f < coded; ++f) w[f] = weight((static_cast<std::uint32_t>(f) + 1) / 2);
  if (g.escape_bits_ > 0) {
    // Escape carries the whole tail mass; weights decrease with magnitude.
    std::uint64_t tail = 0;
    for (std::int64_t f = coded - 1; f < alphabet; ++f) {
      const std::uint64_t x = weight(static_cast<std::uint32_t>((f + 1) / 2));
      if (x == 0) break;
      tail += x;
    }
    w[coded - 1] = tail;
  }

  std::uint64_t total_w = 0;
  for (auto x : w) total_w += x;
  const std::uint64_t spare = kScale - static_cast<std::uint64_t>(coded);
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(coded));
  std::uint32_t used = 0;
  for (std::int32_t f = 0; f < coded; ++f) {
    counts[f] = 1 + static_cast<std::uint32_t>(w[f] * spare / total_w);
    used += counts[f];
  }
  counts[0] += kScale - used;

  g.cum_.resize(static_cast<std::size_t>(coded) + 1);
  g.cost_.resize(static_cast<std::size_t>(coded));
  g.cum_[0] = 0;
  for (std::int32_t f = 0; f < coded; ++f) {
    g.cum_[f + 1] = g.cum_[f] + counts[f];
    g.cost_[f] = kScaleBits - std::log2(static_cast<double>(counts[f]));
  }
  return g;
}

GroupModel GroupModel::build(double variance, int shape_index, std::int32_t alphabet) {
  variance = std::max(variance, 0.1);
  const auto vq = static_cast<std::uint64_t>(std::llround(variance * 65536.0));
  const std::int64_t log2_sigma = (fixed::log2_q16(vq) - 16 * fixed::kOne) >> 1;
  return from_log2_sigma(log2_sigma, shape_index, alphabet);
}

void GroupModel::encode(RangeEncoder& enc, std::uint32_t symbol) const {
  if (coded_symbols() == 1 && !has_escape()) return;
  const auto last = static_cast<std::uint32_t>(coded_symbols() - 1);
  if (has_escape() && symbol >= last) {
    enc.encode(cum_[last], freq(last), kScale);
    enc.encode_bits(symbol - last, escape_bits_);
    return;
  }
  enc.encode(cum_[symbol], freq(symbol), kScale);
}

std::uint32_t GroupModel::decode(RangeDecoder& dec) const {
  if (coded_symbols() == 1 && !has_escape()) return 0;
  const std::uint32_t t = dec.target(kScale);
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), t);
  const auto coded = static_cast<std::uint32_t>(it - cum_.begin() - 1);
  dec.consume(cum_[coded], freq(coded));
  if (has_escape() && coded == static_cast<std::uint32_t>(coded_symbols() - 1)) {
    const std::uint32_t symbol = coded + dec.decode_bits(escape_bits_);
    if (symbol >= static_cast<std::uint32_t>(alphabet_))
      fail(ErrorKind::kIntegrity, "escaped residual outside the alphabet");
    return symbol;
  }
  return coded;
}

std::vector<double> GroupModel::pmf() const {
  std::vector<double> p(static_cast<std::size_t>(coded_symbols()));
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] = static_cast<double>(freq(static_cast<std::uint32_t>(i))) / kScale;
  return p;
}

std::int64_t GroupModelBank::group_log2_sigma(int group, std::int32_t alphabet) {
  const std::int64_t hi =
      fixed::log2_q16(static_cast<std::uint64_t>(std::max(alphabet, 16))) - 2 * fixed::kOne;
  const std::int64_t lo = fixed::kLog2SigmaMin;
  return lo + (hi - lo) * group / kThresholds;
}

GroupModelBank::GroupModelBank(std::int32_t alphabet) : alphabet_(alphabet) {
  models_.reserve(kGroups * kShapeCount);
  for (int n = 0; n < kGroups; ++n)
    for (int s = 0; s < kShapeCount; ++s)
      models_.push_back(GroupModel::from_log2_sigma(group_log2_sigma(n, alphabet), s, alphabet));
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::uint32_t kAdaptInc = 32;
constexpr std::uint32_t kAdaptLimit = 1u << 13;
}  // namespace

AdaptiveModel::AdaptiveModel(int symbols)
    : counts_(static_cast<std::size_t>(symbols), 1), total_(static_cast<std::uint32_t>(symbols)) {}

double AdaptiveModel::cost(int symbol) const {
  return std::log2(static_cast<double>(total_)) - std::log2(static_cast<double>(counts_[symbol]));
}

void AdaptiveModel::update(int symbol) {
  counts_[symbol] += kAdaptInc;
  total_ += kAdaptInc;
  if (total_ > kAdaptLimit) {
    total_ = 0;
    for (auto& c : counts_) {
      c = (c + 1) / 2;
      total_ += c;
    }
  }
}

void AdaptiveModel::encode(RangeEncoder& enc, int symbol) {
  std::uint32_t cum = 0;
  for (int i = 0; i < symbol; ++i) cum += counts_[i];
  if (counts_.size() > 1) enc.encode(cum, counts_[symbol], total_);
  update(symbol);
}

int AdaptiveModel::decode(RangeDecoder& dec) {
  int symbol = 0;
  if (counts_.size() > 1) {
    const std::uint32_t t = dec.target(total_);
    std::uint32_t cum = 0;
    while (cum + counts_[symbol] <= t) cum += counts_[symbol++];
    dec.consume(cum, counts_[symbol]);
  }
  update(symbol);
  return symbol;
}

void encode_with_freqs(RangeEncoder& enc, std::span<const std::uint32_t> freqs, int symbol) {
  std::uint32_t cum = 0;
  for (int i = 0; i < symbol; ++i) cum += freqs[i];
  enc.encode(cum, freqs[symbol], kScale);
}

int decode_with_freqs(RangeDecoder& dec, std::span<const std::uint32_t> freqs) {
  const std::uint32_t t = dec.target(kScale);
  std::uint32_t cum = 0;
  int symbol = 0;
  while (cum + freqs[symbol] <= t) cum += freqs[symbol++];
  dec.consume(cum, freqs[symbol]);
  return symbol;
}

}  // namespace lfmrp
