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

#include "lfmrp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lfmrp/error.hpp"

namespace lfmrp::synth {

LightField4D constant(const Dims4& dims, int planes, int bit_depth, std::uint32_t value) {
  LightField4D lf(dims, planes, bit_depth);
  if (value > lf.max_sample()) fail(ErrorKind::kArgument, "constant value exceeds the bit depth");
  for (int p = 0; p < planes; ++p) {
    auto span = lf.plane(p);
    std::fill(span.begin(), span.end(), static_cast<std::uint16_t>(value));
  }
  return lf;
}

LightField4D noise(const Dims4& dims, int planes, int bit_depth, std::uint64_t seed) {
  LightField4D lf(dims, planes, bit_depth);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> dist(0, lf.max_sample());
  for (int p = 0; p < planes; ++p)
    for (auto& s : lf.plane(p)) s = static_cast<std::uint16_t>(dist(rng));
  return lf;
}

namespace {

/// Smooth random texture: bilinear value noise at two scales plus a
/// sinusoidal pattern, in [0, 1].
std::vector<double> texture(std::uint32_t rows, std::uint32_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> img(std::size_t{rows} * cols, 0.0);
  for (const auto& [cell, weight] : {std::pair{8u, 0.45}, std::pair{3u, 0.25}}) {
    const std::uint32_t gr = rows / cell + 2, gc = cols / cell + 2;
    std::vector<double> grid(std::size_t{gr} * gc);
    for (auto& g : grid) g = unit(rng);
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c) {
        const double y = static_cast<double>(r) / cell, x = static_cast<double>(c) / cell;
        const auto y0 = static_cast<std::uint32_t>(y), x0 = static_cast<std::uint32_t>(x);
        const double fy = y - y0, fx = x - x0;
        auto g = [&](std::uint32_t a, std::uint32_t b) { return grid[std::size_t{a} * gc + b]; };
        const double v = (1 - fy) * ((1 - fx) * g(y0, x0) + fx * g(y0, x0 + 1)) +
                         fy * ((1 - fx) * g(y0 + 1, x0) + fx * g(y0 + 1, x0 + 1));
        img[std::size_t{r} * cols + c] += weight * v;
      }
  }
  const double phase = unit(rng) * 6.283185307179586;
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c)
      img[std::size_t{r} * cols + c] +=
          0.15 * (0.5 + 0.5 * std::sin(0.37 * c + 0.23 * r + phase));
  return img;
}

}  // namespace

LightField4D shifted(const Dims4& dims, int planes, int bit_depth, int disparity,
                     std::uint64_t seed, int noise_amplitude) {
  if (disparity < 0) fail(ErrorKind::kArgument, "disparity must be non-negative");
  LightField4D lf(dims, planes, bit_depth);
  std::mt19937_64 rng(seed);
  const auto k = static_cast<std::uint32_t>(disparity);
  const std::uint32_t rows = dims.v + k * (dims.t - 1);
  const std::uint32_t cols = dims.u + k * (dims.s - 1);
  const double max = lf.max_sample();
  std::uniform_int_distribution<int> jitter(-noise_amplitude, noise_amplitude);
  for (int p = 0; p < planes; ++p) {
    const auto base = texture(rows, cols, rng);
    const double gain = 0.85 - 0.1 * p;
    for (std::uint32_t t = 0; t < dims.t; ++t)
      for (std::uint32_t s = 0; s < dims.s; ++s)
        for (std::uint32_t v = 0; v < dims.v; ++v)
          for (std::uint32_t u = 0; u < dims.u; ++u) {
            const double b = base[std::size_t{v + k * t} * cols + (u + k * s)];
            const double x = std::round(gain * max * b) + jitter(rng);
            lf.set(p, t, s, v, u, static_cast<std::uint16_t>(std::clamp(x, 0.0, max)));
          }
  }
  return lf;
}

LightField4D generate(const std::string& kind, const Dims4& dims, int planes, int bit_depth,
                      std::uint64_t seed, int disparity, std::uint32_t value) {
  if (kind == "constant") return constant(dims, planes, bit_depth, value);
  if (kind == "noise") return noise(dims, planes, bit_depth, seed);
  if (kind == "shifted") return shifted(dims, planes, bit_depth, disparity, seed);
  fail(ErrorKind::kArgument, "unknown generator '" + kind + "' (constant, noise, shifted)");
}

}  // namespace lfmrp::synth
