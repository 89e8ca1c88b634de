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

#include "lfmrp/partition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "lfmrp/entropy.hpp"
#include "lfmrp/error.hpp"

namespace lfmrp {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kHex: return "4d";
    case Mode::kDual: return "dt";
    case Mode::kQuad2d: return "2d";
  }
  return "?";
}

Mode parse_mode(const std::string& name) {
  if (name == "4d" || name == "hex") return Mode::kHex;
  if (name == "dt" || name == "dual") return Mode::kDual;
  if (name == "2d" || name == "quad2d") return Mode::kQuad2d;
  fail(ErrorKind::kArgument, "unknown mode '" + name + "' (expected 4d, dt or 2d)");
}

namespace {

bool halvable(std::uint32_t e) { return e >= 4 && e % 2 == 0; }

Block4D half(const Block4D& b, const std::array<bool, 4>& split, const std::array<int, 4>& upper) {
  Block4D c = b;
  for (int d = 0; d < 4; ++d) {
    if (!split[d]) continue;
    c.extent[d] = b.extent[d] / 2;
    c.origin[d] = b.origin[d] + (upper[d] ? c.extent[d] : 0);
  }
  return c;
}

}  // namespace

bool can_split_hex(const Block4D& b) {
  return std::all_of(b.extent.begin(), b.extent.end(), halvable);
}
bool can_split_spatial(const Block4D& b) { return halvable(b.extent[2]) && halvable(b.extent[3]); }
bool can_split_angular(const Block4D& b) { return halvable(b.extent[0]) && halvable(b.extent[1]); }
bool can_split_quad2d(const Block2D& b) { return halvable(b.height) && halvable(b.width); }

std::array<Block4D, 16> split_hex(const Block4D& b) {
  if (!can_split_hex(b)) fail(ErrorKind::kArgument, "block is not hexadecatree-splittable");
  std::array<Block4D, 16> out;
  for (int i = 0; i < 16; ++i)
    out[i] = half(b, {true, true, true, true}, {(i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1});
  return out;
}

std::array<Block4D, 4> split_spatial(const Block4D& b) {
  if (!can_split_spatial(b)) fail(ErrorKind::kArgument, "block is not spatially splittable");
  std::array<Block4D, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = half(b, {false, false, true, true}, {0, 0, (i >> 1) & 1, i & 1});
  return out;
}

std::array<Block4D, 4> split_angular(const Block4D& b) {
  if (!can_split_angular(b)) fail(ErrorKind::kArgument, "block is not angularly splittable");
  std::array<Block4D, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = half(b, {true, true, false, false}, {(i >> 1) & 1, i & 1, 0, 0});
  return out;
}

std::array<Block4D, 4> split_quad2d_children(const Block4D& b) { return split_spatial(b); }

std::array<Block2D, 4> split_quad2d(const Block2D& b) {
  if (!can_split_quad2d(b)) fail(ErrorKind::kArgument, "2D block is not splittable");
  const std::uint32_t h = b.height / 2;
  const std::uint32_t w = b.width / 2;
  std::array<Block2D, 4> out;
  for (int i = 0; i < 4; ++i)
    out[i] = {b.row + ((i >> 1) & 1 ? h : 0), b.col + (i & 1 ? w : 0), h, w};
  return out;
}

std::optional<Block4D> clip(const Block4D& b, const std::array<std::uint32_t, 4>& dims) {
  Block4D c = b;
  for (int d = 0; d < 4; ++d) {
    if (b.origin[d] >= dims[d]) return std::nullopt;
    c.extent[d] = std::min(b.extent[d], dims[d] - b.origin[d]);
  }
  return c;
}

// ---------------------------------------------------------------------------

double menu_probability(int index) {
  return static_cast<double>(kFlagMenu[static_cast<std::size_t>(index)]) / kFlagMenuDenominator;
}

int menu_argmin(std::uint64_t count0, std::uint64_t count1) {
  if (count0 == 0 && count1 == 0) return kFlagMenuHalf;
  int best = 0;
  double best_cost = 0;
  for (int i = 0; i < static_cast<int>(kFlagMenu.size()); ++i) {
    const double p = menu_probability(i);
    const double cost = -std::log2(p) * static_cast<double>(count0) -
                        std::log2(1.0 - p) * static_cast<double>(count1);
    if (i == 0 || cost < best_cost) {
      best = i;
      best_cost = cost;
    }
  }
  return best;
}

BinaryFlagCost binary_cost_from_index(int index) {
  const double p = menu_probability(index);
  return {index, -std::log2(p), -std::log2(1.0 - p)};
}

BinaryFlagCost flag_cost_binary(std::uint64_t ctx0, std::uint64_t ctx1) {
  return binary_cost_from_index(menu_argmin(ctx0, ctx1));
}

TernaryFlagCost ternary_cost_from_indices(int index_none, int index_spatial) {
  TernaryFlagCost c;
  c.index_none = index_none;
  c.index_spatial = index_spatial;
  const int n = kFlagMenu[static_cast<std::size_t>(index_none)];
  const int s = kFlagMenu[static_cast<std::size_t>(index_spatial)];
  constexpr int d = kFlagMenuDenominator;
  c.prob400 = {n * d, s * (d - n), (d - s) * (d - n)};
  for (int i = 0; i < 3; ++i) c.cost[i] = -std::log2(c.prob400[i] / 400.0);
  return c;
}

TernaryFlagCost flag_cost_ternary(std::uint64_t ctx_none, std::uint64_t ctx_spatial,
                                  std::uint64_t ctx_angular) {
  return ternary_cost_from_indices(menu_argmin(ctx_none, ctx_spatial + ctx_angular),
                                   menu_argmin(ctx_spatial, ctx_angular));
}

std::array<std::uint32_t, 2> binary_flag_freqs(int index) {
  const std::uint32_t f0 =
      static_cast<std::uint32_t>(kFlagMenu[static_cast<std::size_t>(index)]) * kScale /
      kFlagMenuDenominator;
  return {f0, kScale - f0};
}

std::vector<std::uint32_t> dual_flag_freqs(const TernaryFlagCost& cost, bool spatial_legal,
                                           bool angular_legal) {
  const std::uint32_t fn = static_cast<std::uint32_t>(cost.prob400[0]) * kScale / 400;
  if (spatial_legal && angular_legal) {
    const std::uint32_t fs = static_cast<std::uint32_t>(cost.prob400[1]) * kScale / 400;
    return {fn, fs, kScale - fn - fs};
  }
  return {fn, kScale - fn};
}

// ---------------------------------------------------------------------------

PartitionSpace::PartitionSpace(Mode mode, const Dims4& lf, const TreeGeometry& geometry)
    : mode_(mode), lf_(lf), geometry_(geometry) {
  const std::uint32_t top = geometry.top_block;
  if (top < 2 || top > 32 || !std::has_single_bit(top))
    fail(ErrorKind::kArgument, "top block must be a power of two in [2, 32]");
  if (geometry.min_spatial < 1 || geometry.min_angular < 1)
    fail(ErrorKind::kArgument, "minimum block extents must be positive");
  if (lf.count() == 0) fail(ErrorKind::kArgument, "empty light field");
  switch (mode) {
    case Mode::kHex:
      dims_ = {lf.t, lf.s, lf.v, lf.u};
      top_ = {top, top, top, top};
      break;
    case Mode::kDual: {
      dims_ = {lf.t, lf.s, lf.v, lf.u};
      const std::uint32_t ang = std::clamp(std::bit_ceil(std::max(lf.t, lf.s)), 2u, top);
      top_ = {ang, ang, top, top};
      break;
    }
    case Mode::kQuad2d:
      dims_ = {1, 1, lf.t * lf.v, lf.s * lf.u};
      top_ = {1, 1, top, top};
      break;
  }
}

std::size_t PartitionSpace::pixel(const std::array<std::uint32_t, 4>& p) const {
  if (mode_ == Mode::kQuad2d) {
    const std::uint32_t t = p[2] / lf_.v, v = p[2] % lf_.v;
    const std::uint32_t s = p[3] / lf_.u, u = p[3] % lf_.u;
    return ((std::size_t{t} * lf_.s + s) * lf_.v + v) * lf_.u + u;
  }
  return ((std::size_t{p[0]} * lf_.s + p[1]) * lf_.v + p[2]) * lf_.u + p[3];
}

std::vector<Block4D> PartitionSpace::top_blocks() const {
  std::array<std::uint32_t, 4> n{};
  for (int d = 0; d < 4; ++d) n[d] = (dims_[d] + top_[d] - 1) / top_[d];
  std::vector<Block4D> out;
  out.reserve(std::size_t{n[0]} * n[1] * n[2] * n[3]);
  for (std::uint32_t a = 0; a < n[0]; ++a)
    for (std::uint32_t b = 0; b < n[1]; ++b)
      for (std::uint32_t c = 0; c < n[2]; ++c)
        for (std::uint32_t d = 0; d < n[3]; ++d)
          out.push_back({{a * top_[0], b * top_[1], c * top_[2], d * top_[3]}, top_});
  return out;
}

bool PartitionSpace::spatial_legal(const Block4D& nominal) const {
  const std::uint32_t floor = std::max<std::uint32_t>(4, 2 * geometry_.min_spatial);
  return nominal.extent[2] >= floor && nominal.extent[3] >= floor &&
         can_split_spatial(nominal);
}

bool PartitionSpace::angular_legal(const Block4D& nominal) const {
  if (mode_ != Mode::kDual) return false;
  const std::uint32_t floor = std::max<std::uint32_t>(4, 2 * geometry_.min_angular);
  return nominal.extent[0] >= floor && nominal.extent[1] >= floor &&
         can_split_angular(nominal);
}

bool PartitionSpace::hex_legal(const Block4D& nominal) const {
  return mode_ == Mode::kHex && spatial_legal(nominal) && can_split_hex(nominal);
}

bool PartitionSpace::any_split_legal(const Block4D& nominal) const {
  switch (mode_) {
    case Mode::kHex: return hex_legal(nominal);
    case Mode::kDual: return spatial_legal(nominal) || angular_legal(nominal);
    case Mode::kQuad2d: return spatial_legal(nominal);
  }
  return false;
}

int PartitionSpace::level(const Block4D& nominal) {
  return std::bit_width(nominal.extent[2]) - 2;
}

// ---------------------------------------------------------------------------

std::vector<std::optional<Block4D>> split_children(NodeKind kind, const Block4D& nominal,
                                                   const PartitionSpace& space) {
  std::vector<Block4D> kids;
  switch (kind) {
    case NodeKind::kHexSplit: {
      const auto a = split_hex(nominal);
      kids.assign(a.begin(), a.end());
      break;
    }
    case NodeKind::kSpatialSplit:
    case NodeKind::kQuadSplit: {
      const auto a = split_spatial(nominal);
      kids.assign(a.begin(), a.end());
      break;
    }
    case NodeKind::kAngularSplit: {
      const auto a = split_angular(nominal);
      kids.assign(a.begin(), a.end());
      break;
    }
    case NodeKind::kLeaf: fail(ErrorKind::kArgument, "a leaf has no children");
  }
  std::vector<std::optional<Block4D>> out;
  for (const auto& k : kids) {
    if (clip(k, space.dims()))
      out.emplace_back(k);
    else
      out.emplace_back(std::nullopt);
  }
  return out;
}

PartitionTree::PartitionTree(Mode mode, const Block4D& top) : mode_(mode) {
  nodes_.push_back({NodeKind::kLeaf, top, -1, -1});
}

void PartitionTree::split(std::int32_t i, NodeKind kind, const PartitionSpace& space) {
  if (nodes_[i].kind != NodeKind::kLeaf) fail(ErrorKind::kArgument, "node is already split");
  const Block4D& b = nodes_[i].block;
  bool legal = false;
  switch (kind) {
    case NodeKind::kHexSplit: legal = mode_ == Mode::kHex && space.hex_legal(b); break;
    case NodeKind::kSpatialSplit: legal = mode_ == Mode::kDual && space.spatial_legal(b); break;
    case NodeKind::kAngularSplit: legal = mode_ == Mode::kDual && space.angular_legal(b); break;
    case NodeKind::kQuadSplit: legal = mode_ == Mode::kQuad2d && space.spatial_legal(b); break;
    case NodeKind::kLeaf: break;
  }
  if (!legal) fail(ErrorKind::kArgument, "illegal split for this block and mode");
  const auto kids = split_children(kind, b, space);
  nodes_[i].kind = kind;
  nodes_[i].class_index = -1;
  nodes_[i].first_child = static_cast<std::int32_t>(links_.size());
  for (const auto& k : kids) {
    if (!k) {
      links_.push_back(-1);
      continue;
    }
    links_.push_back(static_cast<std::int32_t>(nodes_.size()));
    nodes_.push_back({NodeKind::kLeaf, *k, -1, -1});
  }
}

std::vector<std::int32_t> PartitionTree::leaves() const {
  std::vector<std::int32_t> out;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const std::int32_t i = stack.back();
    stack.pop_back();
    const TreeNode& n = nodes_[i];
    if (n.kind == NodeKind::kLeaf) {
      out.push_back(i);
      continue;
    }
    for (int j = child_slots(n.kind) - 1; j >= 0; --j)
      if (child(i, j) >= 0) stack.push_back(child(i, j));
  }
  return out;
}

// ---------------------------------------------------------------------------

int hex_flag_context(int level, int split_neighbours) {
  if (level < 1 || level > 4) fail(ErrorKind::kArgument, "flag level must be in [1, 4]");
  if (split_neighbours < 0 || split_neighbours > 5)
    fail(ErrorKind::kArgument, "neighbour count must be in [0, 5]");
  return (level - 1) * 6 + split_neighbours;
}

HexFlagContexts::HexFlagContexts(const PartitionSpace& space)
    : dims_(space.dims()), collapsed_ts_(space.mode() == Mode::kQuad2d) {
  for (int level = 1; level <= 4; ++level) {
    const auto g = grid(level);
    flags_[level].assign(std::size_t{g[0]} * g[1] * g[2] * g[3], 0);
  }
}

std::array<std::uint32_t, 4> HexFlagContexts::step(int level) const {
  const std::uint32_t e = 2u << level;
  return collapsed_ts_ ? std::array<std::uint32_t, 4>{1, 1, e, e}
                       : std::array<std::uint32_t, 4>{e, e, e, e};
}

std::array<std::uint32_t, 4> HexFlagContexts::grid(int level) const {
  const auto st = step(level);
  std::array<std::uint32_t, 4> g{};
  for (int d = 0; d < 4; ++d) g[d] = (dims_[d] + st[d] - 1) / st[d];
  return g;
}

bool HexFlagContexts::flag(int level, const std::array<std::int64_t, 4>& cell) const {
  const auto g = grid(level);
  std::size_t idx = 0;
  for (int d = 0; d < 4; ++d) {
    if (cell[d] < 0 || cell[d] >= g[d]) return false;
    idx = idx * g[d] + static_cast<std::size_t>(cell[d]);
  }
  return flags_[level][idx] != 0;
}

int HexFlagContexts::context(const Block4D& nominal) const {
  const int level = PartitionSpace::level(nominal);
  const auto st = step(level);
  std::array<std::int64_t, 4> c{};
  for (int d = 0; d < 4; ++d) c[d] = nominal.origin[d] / st[d];
  static constexpr std::array<std::array<int, 4>, 5> kNeighbours = {
      {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {0, 0, 1, 1}}};
  int count = 0;
  for (const auto& n : kNeighbours)
    count += flag(level, {c[0] - n[0], c[1] - n[1], c[2] - n[2], c[3] - n[3]}) ? 1 : 0;
  return hex_flag_context(level, count);
}

void HexFlagContexts::record(const Block4D& nominal, bool split) {
  const int level = PartitionSpace::level(nominal);
  if (level < 1 || level > 4) return;
  const auto st = step(level);
  const auto g = grid(level);
  std::size_t idx = 0;
  for (int d = 0; d < 4; ++d) idx = idx * g[d] + nominal.origin[d] / st[d];
  flags_[level][idx] = split ? 1 : 0;
}

namespace {

template <typename Fn>
void preorder(const PartitionTree& tree, Fn&& fn) {
  std::vector<std::int32_t> stack{tree.root()};
  while (!stack.empty()) {
    const std::int32_t i = stack.back();
    stack.pop_back();
    const TreeNode& n = tree.node(i);
    fn(n);
    if (n.kind == NodeKind::kLeaf) continue;
    for (int j = PartitionTree::child_slots(n.kind) - 1; j >= 0; --j)
      if (tree.child(i, j) >= 0) stack.push_back(tree.child(i, j));
  }
}

}  // namespace

DualFlagCounts dt_flag_context(const std::vector<PartitionTree>& trees,
                               const PartitionSpace& space) {
  DualFlagCounts counts;
  for (const auto& tree : trees) {
    preorder(tree, [&](const TreeNode& n) {
      if (!space.any_split_legal(n.block)) return;
      switch (n.kind) {
        case NodeKind::kSpatialSplit: counts.add(DualFlag::kSpatial); break;
        case NodeKind::kAngularSplit: counts.add(DualFlag::kAngular); break;
        default: counts.add(DualFlag::kNone); break;
      }
    });
  }
  return counts;
}

std::array<std::array<std::uint64_t, 2>, kHexFlagContexts> hex_flag_counts(
    const std::vector<PartitionTree>& trees, const PartitionSpace& space) {
  std::array<std::array<std::uint64_t, 2>, kHexFlagContexts> counts{};
  HexFlagContexts ctx(space);
  for (const auto& tree : trees) {
    preorder(tree, [&](const TreeNode& n) {
      if (!space.any_split_legal(n.block)) return;
      const bool split = n.kind != NodeKind::kLeaf;
      ++counts[static_cast<std::size_t>(ctx.context(n.block))][split ? 1 : 0];
      ctx.record(n.block, split);
    });
  }
  return counts;
}

}  // namespace lfmrp
