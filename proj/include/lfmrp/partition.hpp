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

#ifndef LFMRP_PARTITION_HPP
#define LFMRP_PARTITION_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lfmrp/lightfield.hpp"

namespace lfmrp {

enum class Mode : std::uint8_t { kHex = 0, kDual = 1, kQuad2d = 2 };

std::string to_string(Mode mode);
/// Accepts "4d"/"hex", "dt"/"dual", "2d"/"quad2d".
Mode parse_mode(const std::string& name);

/// Axis-aligned box in (t, s, v, u).
struct Block4D {
  std::array<std::uint32_t, 4> origin{};
  std::array<std::uint32_t, 4> extent{};

  std::size_t volume() const {
    return std::size_t{extent[0]} * extent[1] * extent[2] * extent[3];
  }
  bool contains(const std::array<std::uint32_t, 4>& p) const {
    for (int d = 0; d < 4; ++d)
      if (p[d] < origin[d] || p[d] >= origin[d] + extent[d]) return false;
    return true;
  }
  bool operator==(const Block4D&) const = default;
};

struct Block2D {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  bool operator==(const Block2D&) const = default;
};

bool can_split_hex(const Block4D& b);
bool can_split_spatial(const Block4D& b);
bool can_split_angular(const Block4D& b);
bool can_split_quad2d(const Block2D& b);

/// Child i takes the upper t half when bit 3 of i is set, s for bit 2, v for
/// bit 1 and u for bit 0. Throws if any extent is below 4 or odd.
std::array<Block4D, 16> split_hex(const Block4D& b);
/// Child i: bit 1 selects the v half, bit 0 the u half.
std::array<Block4D, 4> split_spatial(const Block4D& b);
/// Child i: bit 1 selects the t half, bit 0 the s half.
std::array<Block4D, 4> split_angular(const Block4D& b);
/// Child i: bit 1 selects the row half, bit 0 the column half.
std::array<Block4D, 4> split_quad2d_children(const Block4D& b);
std::array<Block2D, 4> split_quad2d(const Block2D& b);

/// Intersection with [0, dims); nullopt when empty.
std::optional<Block4D> clip(const Block4D& b, const std::array<std::uint32_t, 4>& dims);

// --- Flag probabilities ----------------------------------------------------

/// Menu {0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95} stored in twentieths.
inline constexpr std::array<int, 7> kFlagMenu = {1, 4, 7, 10, 13, 16, 19};
inline constexpr int kFlagMenuDenominator = 20;
inline constexpr int kFlagMenuHalf = 3;
inline constexpr int kHexFlagContexts = 24;

double menu_probability(int index);

/// argmin over the menu of -log2(p) * count0 - log2(1 - p) * count1; first
/// minimum wins. With no observations the 0.5 entry is used.
int menu_argmin(std::uint64_t count0, std::uint64_t count1);

struct BinaryFlagCost {
  int index = kFlagMenuHalf;
  double not_split = 1.0;
  double split = 1.0;
};
BinaryFlagCost flag_cost_binary(std::uint64_t ctx0, std::uint64_t ctx1);
BinaryFlagCost binary_cost_from_index(int index);

enum class DualFlag : std::uint8_t { kNone = 0, kSpatial = 1, kAngular = 2 };

struct TernaryFlagCost {
  int index_none = kFlagMenuHalf;
  int index_spatial = kFlagMenuHalf;
  /// P(N), P(S), P(A) in 1/400 units; always sums to 400.
  std::array<int, 3> prob400{};
  std::array<double, 3> cost{};
};
TernaryFlagCost flag_cost_ternary(std::uint64_t ctx_none, std::uint64_t ctx_spatial,
                                  std::uint64_t ctx_angular);
TernaryFlagCost ternary_cost_from_indices(int index_none, int index_spatial);

/// Range-coder frequencies (sum kScale) for a binary flag with menu index.
std::array<std::uint32_t, 2> binary_flag_freqs(int index);
/// Frequencies for N/S/A; when only one split is legal, the two-symbol form
/// {N, that split} is returned.
std::vector<std::uint32_t> dual_flag_freqs(const TernaryFlagCost& cost, bool spatial_legal,
                                           bool angular_legal);

// --- Partition space and trees ---------------------------------------------

struct TreeGeometry {
  std::uint32_t top_block = 32;     // nominal top block extent (power of two, <= 32)
  std::uint32_t min_spatial = 2;    // smallest leaf extent in (v, u)
  std::uint32_t min_angular = 2;    // smallest leaf extent in (t, s), dual mode
  bool operator==(const TreeGeometry&) const = default;
};

/// The domain a mode partitions: the 4D light field for hex / dual, or the
/// stitched (T*V) x (S*U) image for the 2D quadtree (t and s collapse to 1).
class PartitionSpace {
 public:
  PartitionSpace(Mode mode, const Dims4& lf, const TreeGeometry& geometry);

  Mode mode() const { return mode_; }
  const TreeGeometry& geometry() const { return geometry_; }
  const std::array<std::uint32_t, 4>& dims() const { return dims_; }
  const Dims4& lf_dims() const { return lf_; }
  const std::array<std::uint32_t, 4>& top_extent() const { return top_; }

  std::size_t pixel(const std::array<std::uint32_t, 4>& p) const;
  /// Nominal top blocks in raster order.
  std::vector<Block4D> top_blocks() const;

  bool hex_legal(const Block4D& nominal) const;
  bool spatial_legal(const Block4D& nominal) const;
  bool angular_legal(const Block4D& nominal) const;
  /// Binary split for hex / quad2d; spatial or angular in dual.
  bool any_split_legal(const Block4D& nominal) const;

  /// Level of a block for flag contexts: log2(spatial extent) - 1.
  static int level(const Block4D& nominal);

  /// Calls fn(pixel_index) for every pixel of the clipped block.
  template <typename Fn>
  void for_each_pixel(const Block4D& clipped, Fn&& fn) const {
    for (std::uint32_t a = clipped.origin[0]; a < clipped.origin[0] + clipped.extent[0]; ++a)
      for (std::uint32_t b = clipped.origin[1]; b < clipped.origin[1] + clipped.extent[1]; ++b)
        for (std::uint32_t c = clipped.origin[2]; c < clipped.origin[2] + clipped.extent[2]; ++c)
          for (std::uint32_t d = clipped.origin[3]; d < clipped.origin[3] + clipped.extent[3];
               ++d)
            fn(pixel({a, b, c, d}));
  }

 private:
  Mode mode_;
  Dims4 lf_;
  TreeGeometry geometry_;
  std::array<std::uint32_t, 4> dims_{};
  std::array<std::uint32_t, 4> top_{};
};

enum class NodeKind : std::uint8_t { kLeaf, kHexSplit, kSpatialSplit, kAngularSplit, kQuadSplit };

struct TreeNode {
  NodeKind kind = NodeKind::kLeaf;
  Block4D block;               // nominal extents
  std::int32_t class_index = -1;  // leaves only
  std::int32_t first_child = -1;  // offset of the child slots in the link table
  bool operator==(const TreeNode&) const = default;
};

/// Mode-tagged recursive partition of one top block. Children of a split are
/// stored as a contiguous run of `child_slots` (16 or 4) entries in `links`;
/// children lying wholly outside the partition space are -1.
class PartitionTree {
 public:
  PartitionTree() = default;
  PartitionTree(Mode mode, const Block4D& top);

  Mode mode() const { return mode_; }
  const TreeNode& node(std::int32_t i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }
  std::int32_t root() const { return 0; }

  /// Child slot j of node i (-1 if absent).
  std::int32_t child(std::int32_t i, int j) const { return links_[nodes_[i].first_child + j]; }
  static int child_slots(NodeKind kind) { return kind == NodeKind::kHexSplit ? 16 : 4; }

  /// Turns leaf i into a split and appends its present children as leaves.
  void split(std::int32_t i, NodeKind kind, const PartitionSpace& space);
  void set_class(std::int32_t i, std::int32_t class_index) { nodes_[i].class_index = class_index; }

  /// Leaf node indices in pre-order.
  std::vector<std::int32_t> leaves() const;

  bool operator==(const PartitionTree&) const = default;

 private:
  Mode mode_ = Mode::kHex;
  std::vector<TreeNode> nodes_;
  std::vector<std::int32_t> links_;
};

/// Children of a nominal block for a split kind, with clipping applied:
/// entries are nullopt when the child lies outside the space.
std::vector<std::optional<Block4D>> split_children(NodeKind kind, const Block4D& nominal,
                                                   const PartitionSpace& space);

// --- Flag contexts ---------------------------------------------------------

/// Per-level split flags for the binary modes. Context of a block is
/// (level - 1) * 6 + number of split same-level neighbours among -t, -s, -v,
/// -u and the (-v, -u) diagonal.
class HexFlagContexts {
 public:
  explicit HexFlagContexts(const PartitionSpace& space);

  int context(const Block4D& nominal) const;
  void record(const Block4D& nominal, bool split);
  bool flag(int level, const std::array<std::int64_t, 4>& cell) const;

 private:
  std::array<std::uint32_t, 4> grid(int level) const;
  std::array<std::uint32_t, 4> step(int level) const;

  std::array<std::uint32_t, 4> dims_{};
  bool collapsed_ts_ = false;
  std::array<std::vector<std::uint8_t>, 5> flags_;
};

/// hex_flag_context from an explicit neighbour count.
int hex_flag_context(int level, int split_neighbours);

/// Tally of dual-tree flags over decided blocks.
struct DualFlagCounts {
  std::array<std::uint64_t, 3> counts{};  // N, S, A
  void add(DualFlag f) { ++counts[static_cast<int>(f)]; }
  std::uint64_t total() const { return counts[0] + counts[1] + counts[2]; }
};

/// Tallies the flags of every block where at least one split was legal.
DualFlagCounts dt_flag_context(const std::vector<PartitionTree>& trees,
                               const PartitionSpace& space);

/// Per-context (not split, split) counts of a binary-mode forest.
std::array<std::array<std::uint64_t, 2>, kHexFlagContexts> hex_flag_counts(
    const std::vector<PartitionTree>& trees, const PartitionSpace& space);

}  // namespace lfmrp

#endif  // LFMRP_PARTITION_HPP
