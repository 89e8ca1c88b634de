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

#include "lfmrp/prediction.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "lfmrp/error.hpp"

namespace lfmrp {

namespace {

std::vector<Offset> nearest_offsets(int count, bool causal_only) {
  std::vector<Offset> all;
  const int radius = static_cast<int>(std::ceil(std::sqrt(count))) + 2;
  for (int dv = -radius; dv <= radius; ++dv) {
    for (int du = -radius; du <= radius; ++du) {
      if (causal_only && !(dv < 0 || (dv == 0 && du < 0))) continue;
      all.push_back({dv, du});
    }
  }
  std::sort(all.begin(), all.end(), [](const Offset& a, const Offset& b) {
    const int da = a.dv * a.dv + a.du * a.du;
    const int db = b.dv * b.dv + b.du * b.du;
    if (da != db) return da < db;
    if (a.dv != b.dv) return a.dv < b.dv;
    return a.du < b.du;
  });
  all.resize(static_cast<std::size_t>(count));
  return all;
}

}  // namespace

SupportShape::SupportShape(int current_size, int reference_size)
    : current_size_(current_size), reference_size_(reference_size) {
  if (current_size < 0 || reference_size < 0 || current_size > 64 || reference_size > 64)
    fail(ErrorKind::kArgument, "support sizes must be in [0, 64]");
  current_ = nearest_offsets(current_size, true);
  reference_ = nearest_offsets(reference_size, false);
  for (const auto& o : current_) taps_.push_back({Role::kCurrent, o});
  for (Role r : {Role::kLeft, Role::kTopLeft, Role::kTop, Role::kTopRight})
    for (const auto& o : reference_) taps_.push_back({r, o});
}

std::span<const Offset> SupportShape::offsets(Role role) const {
  return role == Role::kCurrent ? std::span<const Offset>(current_)
                                : std::span<const Offset>(reference_);
}

DistanceWeights::DistanceWeights(const SupportShape& shape) {
  for (const Tap& tap : shape.taps()) {
    const int d = tap.role == Role::kCurrent ? 0 : 1;
    const double dist = std::sqrt(static_cast<double>(
        tap.offset.dv * tap.offset.dv + tap.offset.du * tap.offset.du + d * d));
    delta_.push_back(dist / 64.0);
    // sqrt and division are correctly rounded, so this is platform independent.
    fixed_.push_back(std::llround(64.0 * (1 << kFracBits) / dist));
  }
}

namespace {
const std::array<std::int64_t, kThresholdGrid> kGridValues = [] {
  std::array<std::int64_t, kThresholdGrid> g{};
  for (int j = 0; j < kThresholdGrid; ++j) g[j] = threshold_value(j);
  return g;
}();
}  // namespace

int context_bin(std::int64_t c) {
  return static_cast<int>(std::upper_bound(kGridValues.begin(), kGridValues.end(), c) -
                          kGridValues.begin());
}

std::array<std::int64_t, kThresholds> ClassModel::threshold_values() const {
  std::array<std::int64_t, kThresholds> out{};
  for (int i = 0; i < kThresholds; ++i) out[i] = threshold_value(thresholds[i]);
  return out;
}

int quantise_context(std::int64_t c, const ClassModel& model) {
  // thresholds[i] <= c  <=>  grid index thresholds[i] < context_bin(c)
  const int bin = context_bin(c);
  int n = 0;
  for (auto t : model.thresholds) n += (t < bin) ? 1 : 0;
  return n;
}

// ---------------------------------------------------------------------------

Predictor::Predictor(const Plane& plane, const SupportShape& shape)
    : dims_(plane.dims),
      alphabet_(plane.alphabet),
      samples_(plane.samples),
      shape_(shape),
      weights_(shape) {
  refs_.resize(dims_.sai_count());
  first_ref_.assign(dims_.sai_count(), -1);
  for (std::uint32_t t = 0; t < dims_.t; ++t) {
    for (std::uint32_t s = 0; s < dims_.s; ++s) {
      const std::size_t sai = std::size_t{t} * dims_.s + s;
      refs_[sai].fill(-1);
      for (const auto& n : causal_neighbors({t, s}, dims_)) {
        refs_[sai][static_cast<int>(n.role)] =
            static_cast<std::int32_t>(n.sai.t * dims_.s + n.sai.s);
      }
      if (shape_.reference_size() == 0) continue;
      for (int r : {0, 1, 2, 3}) {
        if (refs_[sai][r] >= 0) {
          first_ref_[sai] = refs_[sai][r];
          break;
        }
      }
    }
  }
}

std::int32_t Predictor::current_fallback(std::size_t sai, std::uint32_t v,
                                         std::uint32_t u) const {
  if (u > 0) return samples_[pixel(sai, v, u - 1)];
  if (v > 0) return samples_[pixel(sai, v - 1, u)];
  if (first_ref_[sai] >= 0) return samples_[pixel(first_ref_[sai], v, u)];
  return alphabet_ / 2;
}

void Predictor::gather(std::size_t sai, std::uint32_t v, std::uint32_t u,
                       std::span<std::int32_t> out) const {
  const int maxv = static_cast<int>(dims_.v) - 1;
  const int maxu = static_cast<int>(dims_.u) - 1;
  const auto taps = shape_.taps();
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const Tap& tap = taps[i];
    const int pv = std::clamp(static_cast<int>(v) + tap.offset.dv, 0, maxv);
    const int pu = std::clamp(static_cast<int>(u) + tap.offset.du, 0, maxu);
    if (tap.role == Role::kCurrent) {
      const bool causal = pv < static_cast<int>(v) ||
                          (pv == static_cast<int>(v) && pu < static_cast<int>(u));
      out[i] = causal ? samples_[pixel(sai, pv, pu)] : current_fallback(sai, v, u);
      continue;
    }
    std::int32_t ref = refs_[sai][static_cast<int>(tap.role) - 1];
    if (ref < 0) ref = first_ref_[sai];
    out[i] = ref < 0 ? current_fallback(sai, v, u) : samples_[pixel(ref, pv, pu)];
  }
}

std::int32_t Predictor::predict(std::span<const std::int32_t> taps,
                                std::span<const std::int32_t> coefficients) const {
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < taps.size(); ++i)
    sum += std::int64_t{coefficients[i]} * taps[i];
  const std::int64_t p = (sum + (1 << (kCoefFracBits - 1))) >> kCoefFracBits;
  return static_cast<std::int32_t>(std::clamp<std::int64_t>(p, 0, alphabet_ - 1));
}

std::int32_t Predictor::predict(std::size_t sai, std::uint32_t v, std::uint32_t u,
                                const ClassModel& model) const {
  std::vector<std::int32_t> taps(static_cast<std::size_t>(shape_.total()));
  gather(sai, v, u, taps);
  return predict(taps, model.coefficients);
}

template <typename Acc, typename Weight>
Acc Predictor::accumulate_context(std::size_t sai, std::uint32_t v, std::uint32_t u,
                                  std::span<const std::int32_t> e, Weight weight) const {
  Acc c{};
  const auto taps = shape_.taps();
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const Tap& tap = taps[i];
    const int pv = static_cast<int>(v) + tap.offset.dv;
    const int pu = static_cast<int>(u) + tap.offset.du;
    if (pv < 0 || pu < 0 || pv >= static_cast<int>(dims_.v) || pu >= static_cast<int>(dims_.u))
      continue;
    if (tap.role == Role::kCurrent) {
      c += weight(i) * e[pixel(sai, pv, pu)];
    } else {
      const std::int32_t ref = refs_[sai][static_cast<int>(tap.role) - 1];
      if (ref >= 0) c += weight(i) * e[pixel(ref, pv, pu)];
    }
  }
  return c;
}

std::int64_t Predictor::context(std::size_t sai, std::uint32_t v, std::uint32_t u,
                                std::span<const std::int32_t> abs_residuals) const {
  return accumulate_context<std::int64_t>(sai, v, u, abs_residuals,
                                          [this](std::size_t i) { return weights_.fixed(i); });
}

double Predictor::context_value(std::size_t sai, std::uint32_t v, std::uint32_t u,
                                std::span<const std::int32_t> abs_residuals) const {
  return accumulate_context<double>(sai, v, u, abs_residuals,
                                    [this](std::size_t i) { return weights_.inverse(i); });
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::size_t kBatchRows = 512;
}

NormalEquations::NormalEquations(int taps)
    : taps_(taps),
      gram_(static_cast<std::size_t>(taps) * taps, 0.0),
      rhs_(static_cast<std::size_t>(taps), 0.0) {
  pending_.reserve(kBatchRows * taps);
}

void NormalEquations::add(std::span<const std::int32_t> taps, std::int32_t target) {
  for (int i = 0; i < taps_; ++i) pending_.push_back(taps[i]);
  pending_y_.push_back(target);
  ++rows_;
  if (pending_y_.size() == kBatchRows) flush();
}

void NormalEquations::flush() const {
  const auto n = static_cast<Eigen::Index>(pending_y_.size());
  if (n == 0) return;
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> x(pending_.data(), n, taps_);
  Eigen::Map<const Eigen::VectorXd> y(pending_y_.data(), n);
  Eigen::Map<Eigen::MatrixXd> g(gram_.data(), taps_, taps_);
  Eigen::Map<Eigen::VectorXd> r(rhs_.data(), taps_);
  g.noalias() += x.transpose() * x;
  r.noalias() += x.transpose() * y;
  pending_.clear();
  pending_y_.clear();
}

std::vector<double> NormalEquations::solve() const {
  flush();
  std::vector<double> out(static_cast<std::size_t>(taps_), 0.0);
  if (rows_ == 0 || taps_ == 0) return out;
  Eigen::Map<const Eigen::MatrixXd> g(gram_.data(), taps_, taps_);
  Eigen::Map<const Eigen::VectorXd> r(rhs_.data(), taps_);
  Eigen::VectorXd a;
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-10) {
    a = llt.solve(r);
  } else {
    const double ridge = 1e-6 * std::max(1.0, g.trace() / taps_);
    Eigen::MatrixXd reg = g;
    reg.diagonal().array() += ridge;
    a = reg.ldlt().solve(r);
  }
  for (int i = 0; i < taps_; ++i) out[i] = std::isfinite(a[i]) ? a[i] : 0.0;
  return out;
}

std::vector<std::int32_t> quantise_coefficients(std::span<const double> coefficients) {
  const double scale = 1 << kCoefFracBits;
  std::vector<std::int32_t> q(coefficients.size());
  std::vector<double> err(coefficients.size());
  double sum = 0;
  std::int64_t qsum = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double x = std::clamp(coefficients[i] * scale, double{kCoefMin}, double{kCoefMax});
    q[i] = static_cast<std::int32_t>(std::lround(x));
    err[i] = x - q[i];
    sum += x;
    qsum += q[i];
  }
  std::int64_t diff = std::llround(sum) - qsum;
  if (q.empty()) return q;
  std::vector<std::size_t> order(q.size());
  std::iota(order.begin(), order.end(), 0);
  // Nudge the coefficients with the largest rounding error towards their
  // real value until the quantised sum matches.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return diff > 0 ? err[a] > err[b] : err[a] < err[b];
  });
  std::size_t budget = 2 * order.size() * static_cast<std::size_t>(std::llabs(diff) + 1);
  for (std::size_t k = 0; diff != 0 && budget > 0; k = (k + 1) % order.size(), --budget) {
    const std::size_t i = order[k];
    const std::int32_t step = diff > 0 ? 1 : -1;
    if (q[i] + step < kCoefMin || q[i] + step > kCoefMax) continue;
    q[i] += step;
    diff -= step;
  }
  return q;
}

std::vector<std::int32_t> design_coefficients(const Predictor& predictor,
                                              std::span<const std::size_t> pixels) {
  const Dims4& d = predictor.dims();
  const int k = predictor.shape().total();
  NormalEquations ne(k);
  std::vector<std::int32_t> taps(static_cast<std::size_t>(k));
  const std::size_t sai_size = d.sai_size();
  for (std::size_t p : pixels) {
    const std::size_t sai = p / sai_size;
    const auto rem = static_cast<std::uint32_t>(p % sai_size);
    predictor.gather(sai, rem / d.u, rem % d.u, taps);
    ne.add(taps, predictor.sample(p));
  }
  const auto a = ne.solve();
  return quantise_coefficients(a);
}

}  // namespace lfmrp
