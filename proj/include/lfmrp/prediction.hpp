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

#ifndef LFMRP_PREDICTION_HPP
#define LFMRP_PREDICTION_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lfmrp/entropy.hpp"
#include "lfmrp/preprocess.hpp"

namespace lfmrp {

/// Reference roles in coefficient order: the current SAI, then the four
/// causal neighbour SAIs.
enum class Role : std::uint8_t { kCurrent, kLeft, kTopLeft, kTop, kTopRight };
inline constexpr int kRoles = 5;

struct Offset {
  int dv = 0;
  int du = 0;
  bool operator==(const Offset&) const = default;
};

struct Tap {
  Role role;
  Offset offset;
};

/// Prediction support: per role, offsets sorted by distance to the target
/// pixel, ties broken by dv then du. Current-SAI offsets are strictly causal.
class SupportShape {
 public:
  SupportShape() = default;
  SupportShape(int current_size, int reference_size);

  int current_size() const { return current_size_; }
  int reference_size() const { return reference_size_; }
  int size(Role role) const {
    return role == Role::kCurrent ? current_size_ : reference_size_;
  }
  std::span<const Offset> offsets(Role role) const;
  /// All taps in coefficient order (c, l, tl, t, tr).
  std::span<const Tap> taps() const { return taps_; }
  int total() const { return static_cast<int>(taps_.size()); }

 private:
  int current_size_ = 0;
  int reference_size_ = 0;
  std::vector<Offset> current_;
  std::vector<Offset> reference_;
  std::vector<Tap> taps_;
};

/// Context weights 1/delta with delta = sqrt(dv^2 + du^2 + d^2) / 64, d = 0
/// for the current SAI and 1 otherwise.
class DistanceWeights {
 public:
  /// Fractional bits of the integer context domain.
  static constexpr int kFracBits = 4;

  explicit DistanceWeights(const SupportShape& shape);

  double delta(std::size_t tap) const { return delta_[tap]; }
  double inverse(std::size_t tap) const { return 1.0 / delta_[tap]; }
  /// round(2^kFracBits / delta).
  std::int64_t fixed(std::size_t tap) const { return fixed_[tap]; }

 private:
  std::vector<double> delta_;
  std::vector<std::int64_t> fixed_;
};

inline constexpr int kCoefFracBits = 6;
inline constexpr std::int32_t kCoefMin = -32768;
inline constexpr std::int32_t kCoefMax = 32767;

/// Threshold candidates in the integer context domain: a 3-bit-mantissa
/// floating grid, v(j) = ((8 + j % 8) << (j / 8)) - 8.
inline constexpr int kThresholdGrid = 192;
constexpr std::int64_t threshold_value(int grid_index) {
  return ((std::int64_t{8} + (grid_index & 7)) << (grid_index >> 3)) - 8;
}
/// Number of grid values <= c; in [1, kThresholdGrid] for c >= 0.
int context_bin(std::int64_t c);

/// One linear predictor with its context quantiser.
struct ClassModel {
  std::vector<std::int32_t> coefficients;        // Q6 fixed point
  std::array<std::uint8_t, kThresholds> thresholds{};  // grid indices, non-decreasing
  std::array<std::uint8_t, kGroups> shapes{};

  ClassModel() { shapes.fill(kGaussianShape); }
  std::array<std::int64_t, kThresholds> threshold_values() const;
  bool operator==(const ClassModel&) const = default;
};

/// Group index = number of thresholds <= c.
template <typename T>
int quantise_context(T c, std::span<const T> thresholds) {
  int n = 0;
  for (T t : thresholds) n += (t <= c) ? 1 : 0;
  return n;
}

/// Group index from grid-index thresholds.
int quantise_context(std::int64_t c, const ClassModel& model);

/// Sample addressing and tap gathering over one coding-domain plane. Missing
/// samples are substituted: out-of-grid positions are clamped, non-causal
/// current-SAI positions fall back to the left, then upper pixel, then the
/// co-located pixel of the first available reference SAI, then mid-range;
/// absent reference SAIs are replaced by the first available one.
class Predictor {
 public:
  Predictor(const Plane& plane, const SupportShape& shape);

  const Dims4& dims() const { return dims_; }
  const SupportShape& shape() const { return shape_; }
  std::int32_t alphabet() const { return alphabet_; }
  std::int32_t sample(std::size_t pixel) const { return samples_[pixel]; }

  /// Reference SAI linear index for role (-1 when absent).
  std::int32_t reference(std::size_t sai, Role role) const {
    return refs_[sai][static_cast<int>(role) - 1];
  }

  /// Fills `out` (size shape().total()) with s(i, k) for pixel (sai, v, u).
  void gather(std::size_t sai, std::uint32_t v, std::uint32_t u,
              std::span<std::int32_t> out) const;

  std::int32_t predict(std::span<const std::int32_t> taps,
                       std::span<const std::int32_t> coefficients) const;

  std::int32_t predict(std::size_t sai, std::uint32_t v, std::uint32_t u,
                       const ClassModel& model) const;

  /// Integer context sum_i sum_k round(16 / delta) * e over support positions
  /// whose residual is available; missing positions contribute 0.
  std::int64_t context(std::size_t sai, std::uint32_t v, std::uint32_t u,
                       std::span<const std::int32_t> abs_residuals) const;

  /// Same sum in real arithmetic: sum (1 / delta) * e.
  double context_value(std::size_t sai, std::uint32_t v, std::uint32_t u,
                       std::span<const std::int32_t> abs_residuals) const;

  std::size_t pixel(std::size_t sai, std::uint32_t v, std::uint32_t u) const {
    return sai * dims_.sai_size() + std::size_t{v} * dims_.u + u;
  }

 private:
  template <typename Acc, typename Weight>
  Acc accumulate_context(std::size_t sai, std::uint32_t v, std::uint32_t u,
                         std::span<const std::int32_t> e, Weight weight) const;

  std::int32_t current_fallback(std::size_t sai, std::uint32_t v, std::uint32_t u) const;

  Dims4 dims_;
  std::int32_t alphabet_;
  std::span<const std::int32_t> samples_;
  SupportShape shape_;
  DistanceWeights weights_;
  std::vector<std::array<std::int32_t, 4>> refs_;
  std::vector<std::int32_t> first_ref_;
};

/// Least-squares accumulator for coefficient design.
class NormalEquations {
 public:
  explicit NormalEquations(int taps);

  void add(std::span<const std::int32_t> taps, std::int32_t target);
  std::size_t rows() const { return rows_; }

  /// Real-valued minimiser of the squared prediction error; falls back to a
  /// ridge-regularised solve when the system is singular.
  std::vector<double> solve() const;

 private:
  void flush() const;

  int taps_;
  std::size_t rows_ = 0;
  mutable std::vector<double> pending_;
  mutable std::vector<double> pending_y_;
  mutable std::vector<double> gram_;
  mutable std::vector<double> rhs_;
};

/// Rounds to Q6 while keeping the coefficient sum equal to round(64 * sum).
std::vector<std::int32_t> quantise_coefficients(std::span<const double> coefficients);

/// Designs class coefficients over the given pixel indices of the plane.
std::vector<std::int32_t> design_coefficients(const Predictor& predictor,
                                              std::span<const std::size_t> pixels);

}  // namespace lfmrp

#endif  // LFMRP_PREDICTION_HPP
