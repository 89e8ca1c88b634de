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

#include <cmath>
#include <map>

#include "doctest.h"
#include "gen.hpp"
#include "lfmrp/entropy.hpp"
#include "lfmrp/error.hpp"
#include "lfmrp/partition.hpp"

using namespace lfmrp;

namespace {

using Voxel = std::array<std::uint32_t, 4>;

std::map<Voxel, int> voxels(const Block4D& b) {
  std::map<Voxel, int> out;
  for (std::uint32_t a = 0; a < b.extent[0]; ++a)
    for (std::uint32_t c = 0; c < b.extent[1]; ++c)
      for (std::uint32_t d = 0; d < b.extent[2]; ++d)
        for (std::uint32_t e = 0; e < b.extent[3]; ++e)
          ++out[{b.origin[0] + a, b.origin[1] + c, b.origin[2] + d, b.origin[3] + e}];
  return out;
}

template <typename Children>
bool tiles(const Block4D& parent, const Children& kids) {
  std::map<Voxel, int> cover;
  for (const auto& k : kids)
    for (const auto& [v, n] : voxels(k)) cover[v] += n;
  return cover == voxels(parent);
}

Block4D block(std::array<std::uint32_t, 4> o, std::array<std::uint32_t, 4> e) { return {o, e}; }

}  // namespace

TEST_SUITE("partition") {

TEST_CASE("split examples") {
  const auto hex = split_hex(block({0, 0, 0, 0}, {32, 32, 32, 32}));
  for (const auto& c : hex) CHECK(c.extent == std::array<std::uint32_t, 4>{16, 16, 16, 16});
  CHECK(hex[15].origin == std::array<std::uint32_t, 4>{16, 16, 16, 16});

  for (const auto& c : split_spatial(block({0, 0, 0, 0}, {8, 8, 32, 32})))
    CHECK(c.extent == std::array<std::uint32_t, 4>{8, 8, 16, 16});
  for (const auto& c : split_angular(block({0, 0, 0, 0}, {8, 8, 32, 32})))
    CHECK(c.extent == std::array<std::uint32_t, 4>{4, 4, 32, 32});
  for (const auto& c : split_quad2d(Block2D{0, 0, 32, 32})) {
    CHECK(c.height == 16);
    CHECK(c.width == 16);
  }

  CHECK_FALSE(can_split_hex(block({0, 0, 0, 0}, {2, 4, 4, 4})));
  CHECK_FALSE(can_split_spatial(block({0, 0, 0, 0}, {8, 8, 4, 2})));
  CHECK_FALSE(can_split_angular(block({0, 0, 0, 0}, {2, 8, 8, 8})));
  CHECK_THROWS_AS(split_hex(block({0, 0, 0, 0}, {2, 4, 4, 4})), Error);
}

TEST_CASE("children tile their parent") {
  gen::Rng rng(8);
  for (std::uint32_t a : {4u, 6u, 8u})
    for (std::uint32_t b : {4u, 8u})
      for (std::uint32_t c : {4u, 6u})
        for (std::uint32_t d : {4u, 8u}) {
          const Block4D p{{gen::uniform(rng, 0, 9), gen::uniform(rng, 0, 9),
                           gen::uniform(rng, 0, 9), gen::uniform(rng, 0, 9)},
                          {a, b, c, d}};
          CHECK(tiles(p, split_hex(p)));
          CHECK(tiles(p, split_spatial(p)));
          CHECK(tiles(p, split_angular(p)));
          std::vector<Block4D> two_step;
          for (const auto& s : split_spatial(p))
            for (const auto& x : split_angular(s)) two_step.push_back(x);
          std::map<Voxel, int> lhs, rhs;
          for (const auto& x : two_step) lhs.insert({x.origin, 0});
          for (const auto& x : split_hex(p)) rhs.insert({x.origin, 0});
          CHECK(lhs == rhs);
        }
}

TEST_CASE("clipping at the light-field boundary") {
  const std::array<std::uint32_t, 4> dims{5, 5, 13, 7};
  CHECK(clip(block({4, 0, 8, 0}, {4, 4, 8, 8}), dims)->extent ==
        std::array<std::uint32_t, 4>{1, 4, 5, 7});
  CHECK_FALSE(clip(block({0, 0, 16, 0}, {4, 4, 8, 8}), dims));
}

TEST_CASE("binary flag menu") {
  const auto even = flag_cost_binary(6, 6);
  CHECK(menu_probability(even.index) == doctest::Approx(0.5));
  CHECK(even.not_split == doctest::Approx(1.0));
  CHECK(even.split == doctest::Approx(1.0));
  CHECK(menu_probability(flag_cost_binary(10, 0).index) == doctest::Approx(0.95));
  CHECK(flag_cost_binary(0, 0).index == kFlagMenuHalf);

  // freqs split the coder scale in menu proportion
  for (int i = 0; i < 7; ++i) {
    const auto f = binary_flag_freqs(i);
    CHECK(f[0] + f[1] == kScale);
    CHECK(f[0] == kFlagMenu[static_cast<std::size_t>(i)] * kScale / 20);
  }
}

TEST_CASE("ternary flag menu") {
  const auto equal = flag_cost_ternary(5, 5, 5);
  CHECK(menu_probability(equal.index_none) == doctest::Approx(0.35));
  CHECK(menu_probability(equal.index_spatial) == doctest::Approx(0.5));

  const auto none = flag_cost_ternary(9, 0, 0);
  CHECK(menu_probability(none.index_none) == doctest::Approx(0.95));
  CHECK(none.cost[0] == doctest::Approx(-std::log2(0.95)));
  CHECK(none.cost[0] == doctest::Approx(0.074).epsilon(0.01));

  for (int n = 0; n < 7; ++n)
    for (int s = 0; s < 7; ++s) {
      const auto c = ternary_cost_from_indices(n, s);
      CHECK(c.prob400[0] + c.prob400[1] + c.prob400[2] == 400);
      const auto f3 = dual_flag_freqs(c, true, true);
      CHECK(f3[0] + f3[1] + f3[2] == kScale);
      for (auto x : f3) CHECK(x > 0u);
      const auto f2 = dual_flag_freqs(c, false, true);
      CHECK(f2.size() == 2);
      CHECK(f2[0] + f2[1] == kScale);
    }
}

TEST_CASE("hexadecatree flag contexts") {
  CHECK(hex_flag_context(1, 0) == 0);
  CHECK(hex_flag_context(4, 5) == 23);
  CHECK_THROWS_AS(hex_flag_context(0, 0), Error);
  CHECK_THROWS_AS(hex_flag_context(1, 6), Error);

  const PartitionSpace space(Mode::kHex, Dims4{8, 8, 8, 8}, TreeGeometry{});
  HexFlagContexts ctx(space);
  const Block4D b = block({4, 4, 4, 4}, {4, 4, 4, 4});
  CHECK(ctx.context(b) == 0);
  // split the five causal neighbours at level 1
  for (const auto& o : std::array<std::array<std::uint32_t, 4>, 5>{
           {{0, 4, 4, 4}, {4, 0, 4, 4}, {4, 4, 0, 4}, {4, 4, 4, 0}, {4, 4, 0, 0}}})
    ctx.record(block(o, {4, 4, 4, 4}), true);
  CHECK(ctx.context(b) == 5);
  // non-neighbours do not count
  HexFlagContexts other(space);
  other.record(block({0, 0, 0, 0}, {4, 4, 4, 4}), true);
  CHECK(other.context(b) == 0);
}

TEST_CASE("partition space legality") {
  const PartitionSpace hex(Mode::kHex, Dims4{13, 13, 40, 30}, TreeGeometry{});
  CHECK(hex.top_blocks().size() == 1u * 1 * 2 * 1);
  CHECK(hex.hex_legal(block({0, 0, 0, 0}, {4, 4, 4, 4})));
  CHECK_FALSE(hex.hex_legal(block({0, 0, 0, 0}, {2, 2, 2, 2})));
  CHECK(PartitionSpace::level(block({0, 0, 0, 0}, {32, 32, 32, 32})) == 4);
  CHECK(PartitionSpace::level(block({0, 0, 0, 0}, {4, 4, 4, 4})) == 1);

  const PartitionSpace dual(Mode::kDual, Dims4{5, 5, 64, 64}, TreeGeometry{});
  CHECK(dual.top_extent() == std::array<std::uint32_t, 4>{8, 8, 32, 32});
  CHECK(dual.angular_legal(block({0, 0, 0, 0}, {4, 4, 8, 8})));
  CHECK_FALSE(dual.angular_legal(block({0, 0, 0, 0}, {2, 2, 8, 8})));
  CHECK_FALSE(dual.hex_legal(block({0, 0, 0, 0}, {8, 8, 8, 8})));

  const PartitionSpace quad(Mode::kQuad2d, Dims4{2, 3, 4, 5}, TreeGeometry{});
  CHECK(quad.dims() == std::array<std::uint32_t, 4>{1, 1, 8, 15});
  // stitched row 5 = SAI row 1, v 1; column 7 = SAI column 1, u 2
  CHECK(quad.pixel({0, 0, 5, 7}) == ((1u * 3 + 1) * 4 + 1) * 5 + 2);

  CHECK_THROWS_AS(PartitionSpace(Mode::kHex, Dims4{2, 2, 2, 2}, TreeGeometry{24, 2, 2}), Error);
}

TEST_CASE("trees and dual flag tallies") {
  const PartitionSpace space(Mode::kDual, Dims4{4, 4, 8, 8}, TreeGeometry{8, 2, 2});
  PartitionTree tree(Mode::kDual, space.top_blocks()[0]);
  CHECK(dt_flag_context({tree}, space).total() == 1);
  tree.split(tree.root(), NodeKind::kSpatialSplit, space);
  CHECK_THROWS_AS(tree.split(tree.root(), NodeKind::kSpatialSplit, space), Error);
  tree.split(tree.child(0, 1), NodeKind::kAngularSplit, space);
  CHECK(tree.leaves().size() == 3 + 4);
  const auto counts = dt_flag_context({tree}, space);
  CHECK(counts.counts[static_cast<int>(DualFlag::kSpatial)] >= 1);
  CHECK(counts.counts[static_cast<int>(DualFlag::kAngular)] == 1);

  PartitionTree hex(Mode::kHex, block({0, 0, 0, 0}, {8, 8, 8, 8}));
  CHECK_THROWS_AS(hex.split(0, NodeKind::kSpatialSplit, space), Error);
}

}  // TEST_SUITE
