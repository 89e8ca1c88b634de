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

// Small generators shared by the test suites.

#ifndef LFMRP_TESTS_GEN_HPP
#define LFMRP_TESTS_GEN_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "lfmrp/lightfield.hpp"
#include "lfmrp/partition.hpp"
#include "lfmrp/preprocess.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline std::uint32_t uniform(Rng& rng, std::uint32_t lo, std::uint32_t hi) {
  return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng);
}

inline lfmrp::Dims4 dims(Rng& rng, std::uint32_t lo, std::uint32_t hi) {
  return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi),
          uniform(rng, lo, hi)};
}

/// Uniform samples, or with `levels` > 0 a handful of distinct values.
inline lfmrp::LightField4D lightfield(Rng& rng, const lfmrp::Dims4& d, int planes, int bit_depth,
                                      int levels = 0) {
  lfmrp::LightField4D lf(d, planes, bit_depth);
  const std::uint32_t top = lf.max_sample();
  std::vector<std::uint16_t> palette;
  for (int i = 0; i < levels; ++i) palette.push_back(static_cast<std::uint16_t>(uniform(rng, 0, top)));
  for (int p = 0; p < planes; ++p)
    for (auto& x : lf.plane(p))
      x = levels > 0 ? palette[uniform(rng, 0, static_cast<std::uint32_t>(levels - 1))]
                     : static_cast<std::uint16_t>(uniform(rng, 0, top));
  return lf;
}

inline lfmrp::Plane plane_of(const lfmrp::LightField4D& lf, int p = 0) {
  lfmrp::Plane out{lf.dims(), static_cast<std::int32_t>(lf.max_sample() + 1), {}};
  out.samples.assign(lf.plane(p).begin(), lf.plane(p).end());
  return out;
}

/// Random legal forest over every top block; leaves get classes in [0, classes).
/// `split_prob(block)` gives the chance a splittable block is split.
template <typename ProbFn>
std::vector<lfmrp::PartitionTree> forest_with(Rng& rng, const lfmrp::PartitionSpace& space,
                                              int classes, ProbFn split_prob) {
  using lfmrp::NodeKind;
  std::vector<lfmrp::PartitionTree> out;
  for (const auto& top : space.top_blocks()) {
    lfmrp::PartitionTree tree(space.mode(), top);
    std::vector<std::int32_t> todo{tree.root()};
    while (!todo.empty()) {
      const auto i = todo.back();
      todo.pop_back();
      const auto b = tree.node(i).block;
      std::vector<NodeKind> kinds;
      switch (space.mode()) {
        case lfmrp::Mode::kHex:
          if (space.hex_legal(b)) kinds.push_back(NodeKind::kHexSplit);
          break;
        case lfmrp::Mode::kQuad2d:
          if (space.spatial_legal(b)) kinds.push_back(NodeKind::kQuadSplit);
          break;
        case lfmrp::Mode::kDual:
          if (space.spatial_legal(b)) kinds.push_back(NodeKind::kSpatialSplit);
          if (space.angular_legal(b)) kinds.push_back(NodeKind::kAngularSplit);
          break;
      }
      if (kinds.empty() || !std::bernoulli_distribution(split_prob(b))(rng)) {
        tree.set_class(i, static_cast<std::int32_t>(uniform(rng, 0, static_cast<std::uint32_t>(classes - 1))));
        continue;
      }
      const auto kind = kinds[uniform(rng, 0, static_cast<std::uint32_t>(kinds.size() - 1))];
      tree.split(i, kind, space);
      // pre-order, so node numbering matches a decoded tree
      for (int j = lfmrp::PartitionTree::child_slots(kind) - 1; j >= 0; --j)
        if (tree.child(i, j) >= 0) todo.push_back(tree.child(i, j));
    }
    out.push_back(std::move(tree));
  }
  return out;
}

inline std::vector<lfmrp::PartitionTree> forest(Rng& rng, const lfmrp::PartitionSpace& space,
                                                int classes, double split_prob = 0.5) {
  return forest_with(rng, space, classes, [=](const lfmrp::Block4D&) { return split_prob; });
}

}  // namespace gen

#endif  // LFMRP_TESTS_GEN_HPP
