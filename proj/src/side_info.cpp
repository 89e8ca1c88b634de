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

#include "lfmrp/side_info.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lfmrp/error.hpp"

namespace lfmrp {

FlagIndices choose_flag_indices(const std::vector<PartitionTree>& forest,
                                const PartitionSpace& space) {
  FlagIndices out;
  if (space.mode() == Mode::kDual) {
    const auto c = dt_flag_context(forest, space).counts;
    const auto cost = flag_cost_ternary(c[0], c[1], c[2]);
    out.none = static_cast<std::uint8_t>(cost.index_none);
    out.spatial = static_cast<std::uint8_t>(cost.index_spatial);
    return out;
  }
  const auto counts = hex_flag_counts(forest, space);
  for (int i = 0; i < kHexFlagContexts; ++i)
    out.binary[i] = static_cast<std::uint8_t>(menu_argmin(counts[i][0], counts[i][1]));
  return out;
}

SideInfoState::SideInfoState(const PartitionSpace& space, const FlagIndices& flags, int classes)
    : space_(space),
      flags_(flags),
      contexts_(space),
      ternary_(ternary_cost_from_indices(flags.none, flags.spatial)),
      mtf_(static_cast<std::size_t>(classes)),
      rank_model_(classes),
      class_map_(space.lf_dims().count(), -1) {
  if (classes < 1) fail(ErrorKind::kArgument, "at least one class is required");
  for (int i : flags.binary)
    if (i >= static_cast<int>(kFlagMenu.size())) fail(ErrorKind::kIntegrity, "bad flag menu index");
  if (flags.none >= kFlagMenu.size() || flags.spatial >= kFlagMenu.size())
    fail(ErrorKind::kIntegrity, "bad flag menu index");
  std::iota(mtf_.begin(), mtf_.end(), 0);
}

SideInfoState::Decision SideInfoState::decision(const Block4D& nominal) const {
  Decision d;
  switch (space_.mode()) {
    case Mode::kHex:
    case Mode::kQuad2d: {
      if (!space_.any_split_legal(nominal)) break;
      const auto f = binary_flag_freqs(flags_.binary[contexts_.context(nominal)]);
      d.freqs.assign(f.begin(), f.end());
      d.kinds = {NodeKind::kLeaf,
                 space_.mode() == Mode::kHex ? NodeKind::kHexSplit : NodeKind::kQuadSplit};
      break;
    }
    case Mode::kDual: {
      const bool sp = space_.spatial_legal(nominal);
      const bool an = space_.angular_legal(nominal);
      if (!sp && !an) break;
      d.freqs = dual_flag_freqs(ternary_, sp, an);
      d.kinds.push_back(NodeKind::kLeaf);
      if (sp) d.kinds.push_back(NodeKind::kSpatialSplit);
      if (an) d.kinds.push_back(NodeKind::kAngularSplit);
      break;
    }
  }
  return d;
}

void SideInfoState::record(const Block4D& nominal, NodeKind kind) {
  if (space_.mode() != Mode::kDual && space_.any_split_legal(nominal))
    contexts_.record(nominal, kind != NodeKind::kLeaf);
}

int SideInfoState::neighbour_class(std::int64_t t, std::int64_t s, std::int64_t v,
                                   std::int64_t u) const {
  const auto& dims = space_.dims();
  const std::array<std::int64_t, 4> p{t, s, v, u};
  for (int d = 0; d < 4; ++d)
    if (p[d] < 0 || p[d] >= dims[d]) return -1;
  return class_map_[space_.pixel({static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(s),
                                  static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(u)})];
}

void SideInfoState::move_to_front(int cls) {
  auto it = std::find(mtf_.begin(), mtf_.end(), cls);
  std::rotate(mtf_.begin(), it, it + 1);
}

void SideInfoState::arrange(const Block4D& b) {
  const std::int64_t t = b.origin[0], s = b.origin[1], v = b.origin[2], u = b.origin[3];
  const int upper = neighbour_class(t, s, v - 1, u);
  const int left = neighbour_class(t, s, v, u - 1);
  const int upper_right = neighbour_class(t, s, v - 1, u + b.extent[3]);
  for (int c : {upper_right, left, upper})
    if (c >= 0) move_to_front(c);
}

int SideInfoState::rank_of(const Block4D& nominal, int cls) {
  if (cls < 0 || cls >= static_cast<int>(mtf_.size()))
    fail(ErrorKind::kArgument, "leaf class index out of range");
  arrange(*clip(nominal, space_.dims()));
  return static_cast<int>(std::find(mtf_.begin(), mtf_.end(), cls) - mtf_.begin());
}

int SideInfoState::class_of_rank(const Block4D& nominal, int rank) {
  arrange(*clip(nominal, space_.dims()));
  return mtf_[static_cast<std::size_t>(rank)];
}

void SideInfoState::commit(const Block4D& nominal, int cls) {
  const Block4D b = *clip(nominal, space_.dims());
  space_.for_each_pixel(b, [&](std::size_t p) { class_map_[p] = static_cast<std::int16_t>(cls); });
  move_to_front(cls);
}

SideInfoBits side_info_bits(const std::vector<PartitionTree>& forest,
                            const PartitionSpace& space, const FlagIndices& flags, int classes) {
  SideInfoState state(space, flags, classes);
  SideInfoBits bits;
  walk_side_info(
      forest, state,
      [&](const std::vector<std::uint32_t>& freqs, int symbol) {
        bits.flags += kScaleBits - std::log2(static_cast<double>(freqs[symbol]));
      },
      [&](AdaptiveModel& model, int rank) {
        bits.classes += model.cost(rank);
        model.update(rank);
      });
  return bits;
}

void encode_side_info(RangeEncoder& enc, const std::vector<PartitionTree>& forest,
                      const PartitionSpace& space, const FlagIndices& flags, int classes) {
  SideInfoState state(space, flags, classes);
  walk_side_info(
      forest, state,
      [&](const std::vector<std::uint32_t>& freqs, int symbol) {
        encode_with_freqs(enc, freqs, symbol);
      },
      [&](AdaptiveModel& model, int rank) { model.encode(enc, rank); });
}

std::vector<PartitionTree> decode_side_info(RangeDecoder& dec, const PartitionSpace& space,
                                            const FlagIndices& flags, int classes) {
  SideInfoState state(space, flags, classes);
  std::vector<PartitionTree> forest;
  std::vector<std::int32_t> stack;
  for (const Block4D& top : space.top_blocks()) {
    PartitionTree tree(space.mode(), top);
    stack.assign(1, tree.root());
    while (!stack.empty()) {
      const std::int32_t i = stack.back();
      stack.pop_back();
      const Block4D block = tree.node(i).block;
      const auto d = state.decision(block);
      NodeKind kind = NodeKind::kLeaf;
      if (!d.freqs.empty()) kind = d.kinds[static_cast<std::size_t>(decode_with_freqs(dec, d.freqs))];
      state.record(block, kind);
      if (kind == NodeKind::kLeaf) {
        const int cls = state.class_of_rank(block, state.rank_model().decode(dec));
        tree.set_class(i, cls);
        state.commit(block, cls);
        continue;
      }
      tree.split(i, kind, space);
      for (int j = PartitionTree::child_slots(kind) - 1; j >= 0; --j)
        if (tree.child(i, j) >= 0) stack.push_back(tree.child(i, j));
    }
    forest.push_back(std::move(tree));
  }
  return forest;
}

std::vector<std::int16_t> class_map(const std::vector<PartitionTree>& forest,
                                    const PartitionSpace& space) {
  std::vector<std::int16_t> map(space.lf_dims().count(), -1);
  for (const auto& tree : forest) {
    for (std::int32_t leaf : tree.leaves()) {
      const auto& n = tree.node(leaf);
      space.for_each_pixel(*clip(n.block, space.dims()),
                           [&](std::size_t p) { map[p] = static_cast<std::int16_t>(n.class_index); });
    }
  }
  return map;
}

}  // namespace lfmrp
