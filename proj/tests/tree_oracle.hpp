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
// Exhaustive tree enumeration used as the oracle for optimise_tree.

#ifndef LFMRP_TESTS_TREE_ORACLE_HPP
#define LFMRP_TESTS_TREE_ORACLE_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <vector>

#include "lfmrp/optimizer.hpp"
#include "lfmrp/partition.hpp"

namespace oracle {

using lfmrp::Block4D;
using lfmrp::NodeKind;
using lfmrp::PartitionSpace;

inline std::vector<NodeKind> legal_kinds(const PartitionSpace& space, const Block4D& b) {
  switch (space.mode()) {
    case lfmrp::Mode::kHex:
      return space.hex_legal(b) ? std::vector<NodeKind>{NodeKind::kHexSplit}
                                : std::vector<NodeKind>{};
    case lfmrp::Mode::kQuad2d:
      return space.spatial_legal(b) ? std::vector<NodeKind>{NodeKind::kQuadSplit}
                                    : std::vector<NodeKind>{};
    case lfmrp::Mode::kDual: {
      std::vector<NodeKind> k;
      if (space.spatial_legal(b)) k.push_back(NodeKind::kSpatialSplit);
      if (space.angular_legal(b)) k.push_back(NodeKind::kAngularSplit);
      return k;
    }
  }
  return {};
}

/// Pixel-additive cost model: leaf cost = sum of per-pixel class costs plus a
/// per-class index cost; flag costs come from a callback.
class PixelCostModel final : public lfmrp::TreeCostModel {
 public:
  using FlagFn = std::function<double(const Block4D&, NodeKind)>;
  PixelCostModel(const PartitionSpace& space, int classes, std::vector<double> pixel_costs,
                 std::vector<double> class_costs, FlagFn flag)
      : space_(space),
        classes_(classes),
        pixel_(std::move(pixel_costs)),
        class_(std::move(class_costs)),
        flag_(std::move(flag)) {}

  int classes() const override { return classes_; }
  double leaf_cost(const Block4D& b, int m) const override {
    double sum = class_[static_cast<std::size_t>(m)];
    if (auto c = lfmrp::clip(b, space_.dims()))
      space_.for_each_pixel(*c, [&](std::size_t p) {
        sum += pixel_[p * static_cast<std::size_t>(classes_) + static_cast<std::size_t>(m)];
      });
    return sum;
  }
  double flag_cost(const Block4D& b, NodeKind kind) const override { return flag_(b, kind); }

 private:
  const PartitionSpace& space_;
  int classes_;
  std::vector<double> pixel_;
  std::vector<double> class_;
  FlagFn flag_;
};

/// Number of distinct legal trees rooted at `b` (leaf classes not counted).
inline double count_trees(const PartitionSpace& space, const Block4D& b) {
  double n = 1;
  for (NodeKind k : legal_kinds(space, b)) {
    double prod = 1;
    for (const auto& c : lfmrp::split_children(k, b, space))
      if (c) prod *= count_trees(space, *c);
    n += prod;
  }
  return n;
}

/// Cost of every legal tree rooted at `b`, each leaf taking its cheapest
/// class (leaf costs are independent, so this loses no optimum). Sums are
/// formed flag first, then children in slot order.
inline std::vector<double> all_tree_costs(const lfmrp::TreeCostModel& model,
                                          const PartitionSpace& space, const Block4D& b) {
  std::vector<double> out;
  double leaf = model.flag_cost(b, NodeKind::kLeaf) + model.leaf_cost(b, 0);
  for (int m = 1; m < model.classes(); ++m)
    leaf = std::min(leaf, model.flag_cost(b, NodeKind::kLeaf) + model.leaf_cost(b, m));
  out.push_back(leaf);
  for (NodeKind k : legal_kinds(space, b)) {
    std::vector<double> partial{model.flag_cost(b, k)};
    for (const auto& c : lfmrp::split_children(k, b, space)) {
      if (!c) continue;
      const auto sub = all_tree_costs(model, space, *c);
      std::vector<double> next;
      next.reserve(partial.size() * sub.size());
      for (double p : partial)
        for (double s : sub) next.push_back(p + s);
      partial.swap(next);
    }
    out.insert(out.end(), partial.begin(), partial.end());
  }
  return out;
}

/// Cost of a concrete tree under `model`, same summation order as above.
inline double tree_cost(const lfmrp::TreeCostModel& model, const lfmrp::PartitionTree& tree,
                        std::int32_t i = 0) {
  const auto& n = tree.node(i);
  double sum = model.flag_cost(n.block, n.kind);
  if (n.kind == NodeKind::kLeaf) return sum + model.leaf_cost(n.block, n.class_index);
  for (int j = 0; j < lfmrp::PartitionTree::child_slots(n.kind); ++j)
    if (tree.child(i, j) >= 0) sum += tree_cost(model, tree, tree.child(i, j));
  return sum;
}

}  // namespace oracle

#endif  // LFMRP_TESTS_TREE_ORACLE_HPP
