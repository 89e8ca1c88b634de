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

#ifndef LFMRP_SIDE_INFO_HPP
#define LFMRP_SIDE_INFO_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "lfmrp/entropy.hpp"
#include "lfmrp/partition.hpp"

namespace lfmrp {

/// Menu indices sent in the header: one per binary context, or the two
/// stage indices of the ternary dual-tree flag.
struct FlagIndices {
  std::array<std::uint8_t, kHexFlagContexts> binary{};
  std::uint8_t none = kFlagMenuHalf;
  std::uint8_t spatial = kFlagMenuHalf;

  FlagIndices() { binary.fill(kFlagMenuHalf); }
  bool operator==(const FlagIndices&) const = default;
};

FlagIndices choose_flag_indices(const std::vector<PartitionTree>& forest,
                                const PartitionSpace& space);

/// Coding state for partition flags and leaf class indices. Walked in the
/// same pre-order by the encoder, the decoder and the rate estimate.
class SideInfoState {
 public:
  SideInfoState(const PartitionSpace& space, const FlagIndices& flags, int classes);

  struct Decision {
    std::vector<std::uint32_t> freqs;  // empty for a forced leaf
    std::vector<NodeKind> kinds;       // kinds[symbol]; kinds[0] is the leaf
  };
  Decision decision(const Block4D& nominal) const;
  void record(const Block4D& nominal, NodeKind kind);

  /// Move-to-front rank of `cls` once the upper, left and upper-right
  /// neighbour classes have been brought to the front.
  int rank_of(const Block4D& nominal, int cls);
  int class_of_rank(const Block4D& nominal, int rank);
  /// Marks the leaf's pixels as class `cls` and moves it to the front.
  void commit(const Block4D& nominal, int cls);

  AdaptiveModel& rank_model() { return rank_model_; }
  /// Class per pixel (plane order), -1 where no leaf has been committed.
  const std::vector<std::int16_t>& class_map() const { return class_map_; }

 private:
  void arrange(const Block4D& clipped);
  int neighbour_class(std::int64_t t, std::int64_t s, std::int64_t v, std::int64_t u) const;
  void move_to_front(int cls);

  const PartitionSpace& space_;
  FlagIndices flags_;
  HexFlagContexts contexts_;
  TernaryFlagCost ternary_;
  std::vector<int> mtf_;
  AdaptiveModel rank_model_;
  std::vector<std::int16_t> class_map_;
};

/// Walks a forest in coding order. flag(freqs, symbol) is called for every
/// coded decision and rank(model, rank) for every leaf.
template <typename FlagFn, typename RankFn>
void walk_side_info(const std::vector<PartitionTree>& forest, SideInfoState& state,
                    FlagFn&& flag, RankFn&& rank) {
  std::vector<std::pair<const PartitionTree*, std::int32_t>> stack;
  for (const auto& tree : forest) {
    stack.assign(1, {&tree, tree.root()});
    while (!stack.empty()) {
      const auto [t, i] = stack.back();
      stack.pop_back();
      const TreeNode& n = t->node(i);
      const auto d = state.decision(n.block);
      if (!d.freqs.empty()) {
        int symbol = 0;
        while (d.kinds[static_cast<std::size_t>(symbol)] != n.kind) ++symbol;
        flag(d.freqs, symbol);
      }
      state.record(n.block, n.kind);
      if (n.kind == NodeKind::kLeaf) {
        rank(state.rank_model(), state.rank_of(n.block, n.class_index));
        state.commit(n.block, n.class_index);
        continue;
      }
      for (int j = PartitionTree::child_slots(n.kind) - 1; j >= 0; --j)
        if (t->child(i, j) >= 0) stack.push_back({t, t->child(i, j)});
    }
  }
}

struct SideInfoBits {
  double flags = 0;
  double classes = 0;
};

/// Exact code length of the flags and class ranks of a forest.
SideInfoBits side_info_bits(const std::vector<PartitionTree>& forest,
                            const PartitionSpace& space, const FlagIndices& flags, int classes);

void encode_side_info(RangeEncoder& enc, const std::vector<PartitionTree>& forest,
                      const PartitionSpace& space, const FlagIndices& flags, int classes);

/// Rebuilds the forest; class indices are validated against `classes`.
std::vector<PartitionTree> decode_side_info(RangeDecoder& dec, const PartitionSpace& space,
                                            const FlagIndices& flags, int classes);

/// Class per pixel (plane order) from the forest leaves.
std::vector<std::int16_t> class_map(const std::vector<PartitionTree>& forest,
                                    const PartitionSpace& space);

}  // namespace lfmrp

#endif  // LFMRP_SIDE_INFO_HPP
