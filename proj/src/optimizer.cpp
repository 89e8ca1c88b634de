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

#include "lfmrp/optimizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>

#include "lfmrp/bitio.hpp"
#include "lfmrp/error.hpp"
#include "lfmrp/parallel.hpp"

namespace lfmrp {

namespace {

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(value, &used);
    if (used != value.size() || x < std::numeric_limits<int>::min() ||
        x > std::numeric_limits<int>::max())
      throw std::invalid_argument(value);
    return static_cast<int>(x);
  } catch (const std::logic_error&) {
    fail(ErrorKind::kArgument, "config key '" + key + "': expected an integer, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  fail(ErrorKind::kArgument, "config key '" + key + "': expected a boolean, got '" + value + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_entry(EncoderConfig& c, const std::string& key, const std::string& value) {
  auto positive = [&](int x, int lo) {
    if (x < lo) fail(ErrorKind::kArgument, "config key '" + key + "' must be >= " + std::to_string(lo));
    return x;
  };
  if (key == "mode") {
    c.mode = parse_mode(value);
  } else if (key == "classes" || key == "M") {
    c.classes = positive(parse_int(key, value), 0);
    if (c.classes > 255) fail(ErrorKind::kArgument, "at most 255 classes are supported");
  } else if (key == "current_support") {
    c.current_support = positive(parse_int(key, value), 0);
  } else if (key == "reference_support") {
    c.reference_support = positive(parse_int(key, value), 0);
  } else if (key == "max_iterations" || key == "MAX_ITERATIONS") {
    c.max_iterations = positive(parse_int(key, value), 1);
  } else if (key == "patience") {
    c.patience = positive(parse_int(key, value), 1);
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(positive(parse_int(key, value), 0));
  } else if (key == "top_block") {
    c.geometry.top_block = static_cast<std::uint32_t>(positive(parse_int(key, value), 2));
  } else if (key == "min_spatial") {
    c.geometry.min_spatial = static_cast<std::uint32_t>(positive(parse_int(key, value), 1));
  } else if (key == "min_angular") {
    c.geometry.min_angular = static_cast<std::uint32_t>(positive(parse_int(key, value), 1));
  } else if (key == "second_loop") {
    c.second_loop = parse_bool(key, value);
  } else if (key == "raw_fallback") {
    c.raw_fallback = parse_bool(key, value);
  } else if (key == "jobs") {
    c.jobs = positive(parse_int(key, value), 1);
  } else {
    fail(ErrorKind::kArgument, "unknown config key '" + key + "'");
  }
}

EncoderConfig load_config(const std::filesystem::path& path, EncoderConfig base) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kArgument, "cannot open config file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::kArgument,
           path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    apply_config_entry(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

int default_class_count(std::size_t pixels) {
  const std::size_t blocks = (pixels + (std::size_t{1} << 16) - 1) >> 16;
  return static_cast<int>(std::max<std::size_t>(8, std::min<std::size_t>(63, blocks)));
}

// ---------------------------------------------------------------------------

std::vector<int> init_classes(std::span<const double> variances, int classes) {
  if (classes < 1) fail(ErrorKind::kArgument, "class count must be >= 1");
  const std::size_t n = variances.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return variances[a] < variances[b]; });
  std::vector<int> out(n, 0);
  for (std::size_t r = 0; r < n; ++r)
    out[order[r]] = static_cast<int>(r * static_cast<std::size_t>(classes) / n);
  return out;
}

BinCostTable::BinCostTable()
    : cost_(static_cast<std::size_t>(kThresholdGrid + 1) * kGroups * kShapeCount, 0.0),
      count_(kThresholdGrid + 1, 0) {}

void BinCostTable::add(int bin, std::uint32_t symbol, const GroupModelBank& bank,
                       bool all_shapes) {
  double* row = &cost_[static_cast<std::size_t>(bin) * kGroups * kShapeCount];
  for (int n = 0; n < kGroups; ++n) {
    if (all_shapes) {
      for (int s = 0; s < kShapeCount; ++s) row[n * kShapeCount + s] += bank.at(n, s).cost(symbol);
    } else {
      row[n * kShapeCount + kGaussianShape] += bank.at(n, kGaussianShape).cost(symbol);
    }
  }
  ++count_[static_cast<std::size_t>(bin)];
}

int group_of_bin(int bin, const std::array<std::uint8_t, kThresholds>& thresholds) {
  int n = 0;
  for (auto t : thresholds) n += (t < bin) ? 1 : 0;
  return n;
}

GroupChoice optimise_thresholds(const BinCostTable& table, bool select_shapes) {
  constexpr int B = kThresholdGrid;  // bins 1..B occur; cut points 0..B-1
  // prefix[(n * S + s) * (B + 1) + k] = cost of bins 1..k in group n with shape s
  const int shapes_lo = select_shapes ? 0 : kGaussianShape;
  std::vector<double> prefix(static_cast<std::size_t>(kGroups) * kShapeCount * (B + 1), 0.0);
  auto pre = [&](int n, int s, int k) -> double& {
    return prefix[(static_cast<std::size_t>(n) * kShapeCount + s) * (B + 1) + k];
  };
  for (int n = 0; n < kGroups; ++n)
    for (int s = shapes_lo; s < kShapeCount; ++s)
      for (int k = 1; k <= B; ++k) pre(n, s, k) = pre(n, s, k - 1) + table.at(k, n, s);
  std::vector<std::size_t> count_prefix(B + 1, 0);
  for (int k = 1; k <= B; ++k) count_prefix[k] = count_prefix[k - 1] + table.count(k);

  // Segment cost of bins (a, b] in group n; empty segments cost 0 with the
  // Gaussian shape.
  auto segment = [&](int n, int a, int b, int* shape) {
    int best_shape = kGaussianShape;
    double best = pre(n, kGaussianShape, b) - pre(n, kGaussianShape, a);
    if (count_prefix[b] != count_prefix[a]) {
      for (int s = shapes_lo; s < kShapeCount; ++s) {
        const double c = pre(n, s, b) - pre(n, s, a);
        if (c < best) {
          best = c;
          best_shape = s;
        }
      }
    } else {
      best = 0;
    }
    if (shape) *shape = best_shape;
    return best;
  };

  std::vector<double> f(static_cast<std::size_t>(kThresholds) * B);
  std::vector<int> arg(static_cast<std::size_t>(kThresholds) * B, 0);
  for (int c = 0; c < B; ++c) f[c] = segment(0, 0, c, nullptr);
  for (int n = 1; n < kThresholds; ++n) {
    for (int c = 0; c < B; ++c) {
      double best = std::numeric_limits<double>::infinity();
      int best_arg = 0;
      for (int p = 0; p <= c; ++p) {
        const double v = f[(n - 1) * B + p] + segment(n, p, c, nullptr);
        if (v < best) {
          best = v;
          best_arg = p;
        }
      }
      f[n * B + c] = best;
      arg[n * B + c] = best_arg;
    }
  }
  double best = std::numeric_limits<double>::infinity();
  int last = 0;
  for (int p = 0; p < B; ++p) {
    const double v = f[(kThresholds - 1) * B + p] + segment(kGroups - 1, p, B, nullptr);
    if (v < best) {
      best = v;
      last = p;
    }
  }
  GroupChoice out;
  out.bits = best;
  out.thresholds[kThresholds - 1] = static_cast<std::uint8_t>(last);
  for (int n = kThresholds - 1; n > 0; --n)
    out.thresholds[n - 1] = static_cast<std::uint8_t>(arg[n * B + out.thresholds[n]]);

  // Collapse rule for a class whose pixels share a single bin.
  int occupied = 0, only = 0;
  for (int k = 1; k <= B; ++k)
    if (table.count(k) > 0) {
      ++occupied;
      only = k;
    }
  if (occupied == 1) {
    const int g = group_of_bin(only, out.thresholds);
    for (int i = 0; i < kThresholds; ++i)
      out.thresholds[i] = static_cast<std::uint8_t>(i < g ? only - 1 : std::min(only, B - 1));
  }

  out.shapes.fill(kGaussianShape);
  for (int n = 0; n < kGroups; ++n) {
    const int a = n == 0 ? 0 : out.thresholds[n - 1];
    const int b = n == kGroups - 1 ? B : out.thresholds[n];
    if (b > a) {
      int s = kGaussianShape;
      segment(n, a, b, &s);
      out.shapes[n] = static_cast<std::uint8_t>(s);
    }
  }
  return out;
}

double coefficient_bits(const ClassModel& model) {
  double bits = 0;
  for (auto c : model.coefficients) bits += BitWriter::se_length(c);
  return bits;
}

double threshold_bits(const ClassModel& model) {
  double bits = 3.0 * kGroups;
  int prev = 0;
  for (auto t : model.thresholds) {
    bits += BitWriter::ue_length(static_cast<std::uint64_t>(t - prev));
    prev = t;
  }
  return bits;
}

int choose_class(std::span<const double> costs, std::span<const int> preferred) {
  int best = -1;
  auto consider = [&](int m) {
    if (m < 0 || m >= static_cast<int>(costs.size())) return;
    if (best < 0 || costs[m] < costs[best]) best = m;
  };
  for (int m : preferred) consider(m);
  for (int m = 0; m < static_cast<int>(costs.size()); ++m) consider(m);
  return best;
}

// ---------------------------------------------------------------------------

namespace {

struct BlockKey {
  std::array<std::uint32_t, 8> v;
  bool operator==(const BlockKey&) const = default;
};

struct BlockKeyHash {
  std::size_t operator()(const BlockKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (auto x : k.v) h = (h ^ x) * 1099511628211ull;
    return static_cast<std::size_t>(h);
  }
};

BlockKey key_of(const Block4D& b) {
  return {{b.origin[0], b.origin[1], b.origin[2], b.origin[3], b.extent[0], b.extent[1],
           b.extent[2], b.extent[3]}};
}

std::vector<NodeKind> split_kinds(const PartitionSpace& space, const Block4D& b) {
  switch (space.mode()) {
    case Mode::kHex:
      if (space.hex_legal(b)) return {NodeKind::kHexSplit};
      return {};
    case Mode::kQuad2d:
      if (space.spatial_legal(b)) return {NodeKind::kQuadSplit};
      return {};
    case Mode::kDual: {
      std::vector<NodeKind> k;
      if (space.spatial_legal(b)) k.push_back(NodeKind::kSpatialSplit);
      if (space.angular_legal(b)) k.push_back(NodeKind::kAngularSplit);
      return k;
    }
  }
  return {};
}

class TreeSearch {
 public:
  TreeSearch(const TreeCostModel& model, const PartitionSpace& space)
      : model_(model), space_(space) {}

  struct Choice {
    double cost;
    NodeKind kind;
    int cls;
  };

  Choice solve(const Block4D& b) {
    const auto key = key_of(b);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    int best_m = 0;
    double best_leaf = model_.leaf_cost(b, 0);
    for (int m = 1; m < model_.classes(); ++m) {
      const double c = model_.leaf_cost(b, m);
      if (c < best_leaf) {
        best_leaf = c;
        best_m = m;
      }
    }
    Choice choice{model_.flag_cost(b, NodeKind::kLeaf) + best_leaf, NodeKind::kLeaf, best_m};
    for (NodeKind kind : split_kinds(space_, b)) {
      double j2 = model_.flag_cost(b, kind);
      for (const auto& child : split_children(kind, b, space_))
        if (child) j2 += solve(*child).cost;
      if (j2 < choice.cost) choice = {j2, kind, -1};
    }
    memo_.emplace(key, choice);
    return choice;
  }

  void build(PartitionTree& tree, std::int32_t i) {
    const Choice c = memo_.at(key_of(tree.node(i).block));
    if (c.kind == NodeKind::kLeaf) {
      tree.set_class(i, c.cls);
      return;
    }
    tree.split(i, c.kind, space_);
    for (int j = 0; j < PartitionTree::child_slots(c.kind); ++j)
      if (tree.child(i, j) >= 0) build(tree, tree.child(i, j));
  }

 private:
  const TreeCostModel& model_;
  const PartitionSpace& space_;
  std::unordered_map<BlockKey, Choice, BlockKeyHash> memo_;
};

}  // namespace

TreeSearchResult optimise_tree(const TreeCostModel& model, const PartitionSpace& space,
                               const Block4D& top) {
  TreeSearch search(model, space);
  TreeSearchResult out;
  out.cost = search.solve(top).cost;
  out.tree = PartitionTree(space.mode(), top);
  search.build(out.tree, out.tree.root());
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct PixelPos {
  std::size_t sai;
  std::uint32_t v;
  std::uint32_t u;
};

PixelPos position(const Dims4& d, std::size_t p) {
  const std::size_t sai_size = d.sai_size();
  const auto rem = static_cast<std::uint32_t>(p % sai_size);
  return {p / sai_size, rem / d.u, rem % d.u};
}

using GroupTable = std::array<std::uint8_t, kThresholdGrid + 1>;

std::vector<GroupTable> group_tables(const std::vector<ClassModel>& classes) {
  std::vector<GroupTable> out(classes.size());
  for (std::size_t m = 0; m < classes.size(); ++m)
    for (int b = 0; b <= kThresholdGrid; ++b)
      out[m][b] = static_cast<std::uint8_t>(group_of_bin(b, classes[m].thresholds));
  return out;
}

/// Code length of pixel p under every class, with the context bin fixed.
void all_class_costs(const PlaneAnalysis& a, const std::vector<ClassModel>& classes,
                     const std::vector<GroupTable>& groups, std::size_t p, int bin,
                     std::span<std::int32_t> taps, std::span<double> out) {
  const auto pos = position(a.plane().dims, p);
  a.predictor().gather(pos.sai, pos.v, pos.u, taps);
  const std::int32_t s = a.plane().samples[p];
  for (std::size_t m = 0; m < classes.size(); ++m) {
    const std::int32_t pred = a.predictor().predict(taps, classes[m].coefficients);
    const std::uint32_t sym = fold_residual(s, pred, a.plane().alphabet);
    const int g = groups[m][bin];
    out[m] = a.bank().at(g, classes[m].shapes[g]).cost(sym);
  }
}

std::array<std::uint32_t, 4> cell_extent(Mode mode) {
  return mode == Mode::kQuad2d ? std::array<std::uint32_t, 4>{1, 1, 2, 2}
                               : std::array<std::uint32_t, 4>{2, 2, 2, 2};
}

/// Flag and class-index costs frozen from the previous forest.
class SnapshotCosts {
 public:
  SnapshotCosts(const PartitionSpace& space, const std::vector<PartitionTree>& forest,
                const FlagIndices& flags, int classes)
      : state_(space, flags, classes), class_cost_(static_cast<std::size_t>(classes)) {
    std::vector<std::size_t> usage(static_cast<std::size_t>(classes), 0);
    walk_side_info(
        forest, state_, [](const std::vector<std::uint32_t>&, int) {},
        [](AdaptiveModel&, int) {});
    std::size_t total = 0;
    for (const auto& tree : forest)
      for (auto leaf : tree.leaves()) {
        ++usage[static_cast<std::size_t>(tree.node(leaf).class_index)];
        ++total;
      }
    for (int m = 0; m < classes; ++m)
      class_cost_[m] = -std::log2((static_cast<double>(usage[m]) + 1.0) /
                                  (static_cast<double>(total) + classes));
  }

  double flag(const Block4D& b, NodeKind kind) const {
    const auto d = state_.decision(b);
    for (std::size_t i = 0; i < d.kinds.size() && !d.freqs.empty(); ++i)
      if (d.kinds[i] == kind) return kScaleBits - std::log2(static_cast<double>(d.freqs[i]));
    return 0.0;
  }
  double class_cost(int m) const { return class_cost_[static_cast<std::size_t>(m)]; }

 private:
  SideInfoState state_;
  std::vector<double> class_cost_;
};

/// Tree cost model over one top block: per-cell code length sums for every
/// class, aggregated on demand.
class CellCostModel final : public TreeCostModel {
 public:
  CellCostModel(const PlaneAnalysis& a, const std::vector<ClassModel>& classes,
                const Residuals& r, const SnapshotCosts& snapshot, const Block4D& top)
      : space_(a.space()),
        snapshot_(snapshot),
        classes_(static_cast<int>(classes.size())),
        cell_(cell_extent(a.space().mode())),
        top_(top) {
    const Block4D clipped = *clip(top, space_.dims());
    for (int d = 0; d < 4; ++d) grid_[d] = (clipped.extent[d] + cell_[d] - 1) / cell_[d];
    cells_.assign(std::size_t{grid_[0]} * grid_[1] * grid_[2] * grid_[3] * classes_, 0.0);
    const auto groups = group_tables(classes);
    std::vector<std::int32_t> taps(static_cast<std::size_t>(a.predictor().shape().total()));
    std::vector<double> costs(static_cast<std::size_t>(classes_));
    const auto& o = clipped.origin;
    for (std::uint32_t t = o[0]; t < o[0] + clipped.extent[0]; ++t)
      for (std::uint32_t s = o[1]; s < o[1] + clipped.extent[1]; ++s)
        for (std::uint32_t v = o[2]; v < o[2] + clipped.extent[2]; ++v)
          for (std::uint32_t u = o[3]; u < o[3] + clipped.extent[3]; ++u) {
            const std::size_t p = space_.pixel({t, s, v, u});
            all_class_costs(a, classes, groups, p, r.bin[p], taps, costs);
            double* cell = &cells_[cell_index({t, s, v, u}) * classes_];
            for (int m = 0; m < classes_; ++m) cell[m] += costs[m];
          }
  }

  int classes() const override { return classes_; }

  double leaf_cost(const Block4D& b, int m) const override {
    return residual_costs(b)[static_cast<std::size_t>(m)] + snapshot_.class_cost(m);
  }

  double flag_cost(const Block4D& b, NodeKind kind) const override {
    return snapshot_.flag(b, kind);
  }

 private:
  std::size_t cell_index(const std::array<std::uint32_t, 4>& p) const {
    std::size_t idx = 0;
    for (int d = 0; d < 4; ++d) idx = idx * grid_[d] + (p[d] - top_.origin[d]) / cell_[d];
    return idx;
  }

  const std::vector<double>& residual_costs(const Block4D& b) const {
    const auto key = key_of(b);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::vector<double> sum(static_cast<std::size_t>(classes_), 0.0);
    if (clip(b, space_.dims())) {
      bool is_cell = true;
      for (int d = 0; d < 4; ++d) is_cell = is_cell && b.extent[d] <= cell_[d];
      if (is_cell) {
        const double* cell = &cells_[cell_index(b.origin) * classes_];
        std::copy(cell, cell + classes_, sum.begin());
      } else {
        std::array<bool, 4> halve{};
        for (int d = 0; d < 4; ++d) halve[d] = b.extent[d] > cell_[d];
        for (int i = 0; i < 16; ++i) {
          Block4D c = b;
          bool skip = false;
          for (int d = 0; d < 4; ++d) {
            const bool upper = (i >> (3 - d)) & 1;
            if (!halve[d]) {
              skip = skip || upper;
              continue;
            }
            c.extent[d] = b.extent[d] / 2;
            c.origin[d] = b.origin[d] + (upper ? c.extent[d] : 0);
          }
          if (skip) continue;
          const auto& part = residual_costs(c);
          for (int m = 0; m < classes_; ++m) sum[m] += part[m];
        }
      }
    }
    return memo_.emplace(key, std::move(sum)).first->second;
  }

  const PartitionSpace& space_;
  const SnapshotCosts& snapshot_;
  int classes_;
  std::array<std::uint32_t, 4> cell_;
  std::array<std::uint32_t, 4> grid_{};
  Block4D top_;
  std::vector<double> cells_;
  mutable std::unordered_map<BlockKey, std::vector<double>, BlockKeyHash> memo_;
};

}  // namespace

// ---------------------------------------------------------------------------

PlaneAnalysis::PlaneAnalysis(const Plane& plane, const EncoderConfig& config)
    : plane_(plane),
      config_(config),
      predictor_(plane, SupportShape(config.current_support, config.reference_support)),
      space_(config.mode, plane.dims, config.geometry),
      bank_(plane.alphabet) {}

Residuals PlaneAnalysis::residuals(const std::vector<ClassModel>& classes,
                                   const std::vector<std::int16_t>& class_map) const {
  const Dims4& d = plane_.dims;
  Residuals r;
  r.abs_error.resize(plane_.samples.size());
  r.symbol.resize(plane_.samples.size());
  r.bin.resize(plane_.samples.size());
  const std::size_t sai_size = d.sai_size();
  parallel_for(d.sai_count(), config_.jobs, [&](std::size_t sai) {
    std::vector<std::int32_t> taps(static_cast<std::size_t>(predictor_.shape().total()));
    for (std::uint32_t v = 0; v < d.v; ++v)
      for (std::uint32_t u = 0; u < d.u; ++u) {
        const std::size_t p = sai * sai_size + std::size_t{v} * d.u + u;
        predictor_.gather(sai, v, u, taps);
        const auto& model = classes[static_cast<std::size_t>(class_map[p])];
        const std::int32_t pred = predictor_.predict(taps, model.coefficients);
        r.abs_error[p] = std::abs(plane_.samples[p] - pred);
        r.symbol[p] = fold_residual(plane_.samples[p], pred, plane_.alphabet);
      }
  });
  parallel_for(d.sai_count(), config_.jobs, [&](std::size_t sai) {
    for (std::uint32_t v = 0; v < d.v; ++v)
      for (std::uint32_t u = 0; u < d.u; ++u) {
        const std::size_t p = sai * sai_size + std::size_t{v} * d.u + u;
        r.bin[p] = static_cast<std::uint8_t>(
            context_bin(predictor_.context(sai, v, u, r.abs_error)));
      }
  });
  return r;
}

double PlaneAnalysis::residual_cost(const std::vector<ClassModel>& classes,
                                    const std::vector<std::int16_t>& class_map,
                                    const Residuals& r) const {
  const auto groups = group_tables(classes);
  double bits = 0;
  for (std::size_t p = 0; p < r.symbol.size(); ++p) {
    const auto m = static_cast<std::size_t>(class_map[p]);
    const int g = groups[m][r.bin[p]];
    bits += bank_.at(g, classes[m].shapes[g]).cost(r.symbol[p]);
  }
  return bits;
}

void PlaneAnalysis::optimise_groups(std::vector<ClassModel>& classes,
                                    const std::vector<std::int16_t>& class_map,
                                    const Residuals& r, bool select_shapes) const {
  std::vector<std::vector<std::size_t>> members(classes.size());
  for (std::size_t p = 0; p < class_map.size(); ++p)
    members[static_cast<std::size_t>(class_map[p])].push_back(p);
  parallel_for(classes.size(), config_.jobs, [&](std::size_t m) {
    if (members[m].empty()) return;
    BinCostTable table;
    for (std::size_t p : members[m]) table.add(r.bin[p], r.symbol[p], bank_, select_shapes);
    const GroupChoice choice = optimise_thresholds(table, select_shapes);
    classes[m].thresholds = choice.thresholds;
    classes[m].shapes = choice.shapes;
  });
}

CostBreakdown PlaneAnalysis::evaluate(const PlaneSolution& solution) const {
  const auto map = class_map(solution.forest, space_);
  const Residuals r = residuals(solution.classes, map);
  CostBreakdown c;
  c.residuals = residual_cost(solution.classes, map, r);
  for (const auto& m : solution.classes) {
    c.coefficients += coefficient_bits(m);
    c.thresholds += threshold_bits(m);
  }
  const auto side = side_info_bits(solution.forest, space_, solution.flags,
                                   static_cast<int>(solution.classes.size()));
  c.flags = side.flags;
  c.classes = side.classes;
  return c;
}

std::vector<PartitionTree> PlaneAnalysis::fixed_forest() const {
  const auto& top = space_.top_extent();
  const auto& g = config_.geometry;
  std::array<std::uint32_t, 4> fixed{};
  switch (space_.mode()) {
    case Mode::kHex: {
      const std::uint32_t f = std::bit_ceil(std::max<std::uint32_t>(4, g.min_spatial));
      for (int d = 0; d < 4; ++d) fixed[d] = std::min(f, top[d]);
      break;
    }
    case Mode::kDual: {
      const std::uint32_t fa = std::bit_ceil(std::max<std::uint32_t>(4, g.min_angular));
      const std::uint32_t fs = std::bit_ceil(std::max<std::uint32_t>(4, g.min_spatial));
      fixed = {std::min(fa, top[0]), std::min(fa, top[1]), std::min(fs, top[2]),
               std::min(fs, top[3])};
      break;
    }
    case Mode::kQuad2d: {
      const std::uint32_t q = std::bit_ceil(std::max<std::uint32_t>(8, g.min_spatial));
      fixed = {1, 1, std::min(q, top[2]), std::min(q, top[3])};
      break;
    }
  }
  std::vector<PartitionTree> forest;
  for (const Block4D& tb : space_.top_blocks()) {
    PartitionTree tree(space_.mode(), tb);
    std::vector<std::int32_t> stack{tree.root()};
    while (!stack.empty()) {
      const std::int32_t i = stack.back();
      stack.pop_back();
      const Block4D b = tree.node(i).block;
      std::optional<NodeKind> kind;
      if (space_.mode() == Mode::kDual) {
        if (b.extent[0] > fixed[0] && space_.angular_legal(b))
          kind = NodeKind::kAngularSplit;
        else if (b.extent[2] > fixed[2] && space_.spatial_legal(b))
          kind = NodeKind::kSpatialSplit;
      } else if (b.extent[2] > fixed[2] && space_.any_split_legal(b)) {
        kind = space_.mode() == Mode::kHex ? NodeKind::kHexSplit : NodeKind::kQuadSplit;
      }
      if (!kind) continue;
      tree.split(i, *kind, space_);
      for (int j = 0; j < PartitionTree::child_slots(*kind); ++j)
        if (tree.child(i, j) >= 0) stack.push_back(tree.child(i, j));
    }
    forest.push_back(std::move(tree));
  }
  return forest;
}

// ---------------------------------------------------------------------------

namespace {

struct LeafRef {
  std::size_t tree;
  std::int32_t node;
  Block4D clipped;
};

std::vector<LeafRef> leaf_refs(const std::vector<PartitionTree>& forest,
                               const PartitionSpace& space) {
  std::vector<LeafRef> out;
  for (std::size_t t = 0; t < forest.size(); ++t)
    for (auto leaf : forest[t].leaves())
      out.push_back({t, leaf, *clip(forest[t].node(leaf).block, space.dims())});
  return out;
}

int class_at(const PartitionSpace& space, const std::vector<std::int16_t>& map, std::int64_t t,
             std::int64_t s, std::int64_t v, std::int64_t u) {
  const std::array<std::int64_t, 4> p{t, s, v, u};
  for (int d = 0; d < 4; ++d)
    if (p[d] < 0 || p[d] >= space.dims()[d]) return -1;
  return map[space.pixel({static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(s),
                          static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(u)})];
}

void assign(std::vector<PartitionTree>& forest, const std::vector<LeafRef>& leaves,
            const std::vector<int>& classes) {
  for (std::size_t i = 0; i < leaves.size(); ++i)
    forest[leaves[i].tree].set_class(leaves[i].node, classes[i]);
}

struct Candidate {
  PlaneSolution solution;
  CostBreakdown cost;
};

/// Tracks the best candidate and the two stopping rules of a loop.
class LoopControl {
 public:
  LoopControl(const EncoderConfig& c, LoopStats& stats, std::optional<Candidate>& best)
      : config_(c), stats_(stats), best_(best) {}

  bool running() const {
    return stats_.iterations < config_.max_iterations && stale_ < config_.patience;
  }

  void offer(Candidate&& cand) {
    ++stats_.iterations;
    if (!best_ || cand.cost.total() < best_->cost.total()) {
      stats_.accepted.push_back(cand.cost.total());
      best_ = std::move(cand);
      stale_ = 0;
    } else if (++stale_ >= config_.patience) {
      stats_.stopped_by_patience = true;
    }
  }

 private:
  const EncoderConfig& config_;
  LoopStats& stats_;
  std::optional<Candidate>& best_;
  int stale_ = 0;
};

}  // namespace

OptimiserResult run_encoder_loops(const Plane& plane, const EncoderConfig& config) {
  if (plane.samples.empty()) fail(ErrorKind::kArgument, "empty plane");
  PlaneAnalysis a(plane, config);
  const PartitionSpace& space = a.space();
  OptimiserResult result;

  // Loop 1: fixed-size blocks.
  std::vector<PartitionTree> forest = a.fixed_forest();
  const auto leaves = leaf_refs(forest, space);
  const int requested = config.classes > 0 ? config.classes : default_class_count(plane.samples.size());
  const int M = std::max(1, std::min<int>(requested, static_cast<int>(leaves.size())));

  std::vector<double> variances(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    double sum = 0, sum2 = 0;
    std::size_t n = 0;
    space.for_each_pixel(leaves[i].clipped, [&](std::size_t p) {
      const double x = plane.samples[p];
      sum += x;
      sum2 += x * x;
      ++n;
    });
    variances[i] = sum2 / n - (sum / n) * (sum / n);
  }
  std::vector<int> assignment = init_classes(variances, M);
  std::vector<ClassModel> classes(static_cast<std::size_t>(M));
  for (auto& c : classes) c.coefficients.assign(a.predictor().shape().total(), 0);

  std::optional<Candidate> best;
  LoopControl loop1(config, result.loop1, best);
  const int taps_count = a.predictor().shape().total();
  while (loop1.running()) {
    assign(forest, leaves, assignment);
    const auto map = class_map(forest, space);
    std::vector<std::vector<std::size_t>> members(classes.size());
    for (std::size_t i = 0; i < leaves.size(); ++i)
      space.for_each_pixel(leaves[i].clipped, [&](std::size_t p) {
        members[static_cast<std::size_t>(assignment[i])].push_back(p);
      });
    parallel_for(classes.size(), config.jobs, [&](std::size_t m) {
      if (!members[m].empty()) classes[m].coefficients = design_coefficients(a.predictor(), members[m]);
    });
    const Residuals r = a.residuals(classes, map);
    a.optimise_groups(classes, map, r, false);

    Candidate cand{{classes, forest, choose_flag_indices(forest, space)}, {}};
    cand.cost = a.evaluate(cand.solution);
    loop1.offer(std::move(cand));

    // Per-block reclassification with contexts held fixed.
    const auto groups = group_tables(classes);
    std::vector<int> next(leaves.size());
    parallel_for(leaves.size(), config.jobs, [&](std::size_t i) {
      std::vector<std::int32_t> taps(static_cast<std::size_t>(taps_count));
      std::vector<double> pixel(classes.size()), total(classes.size(), 0.0);
      space.for_each_pixel(leaves[i].clipped, [&](std::size_t p) {
        all_class_costs(a, classes, groups, p, r.bin[p], taps, pixel);
        for (std::size_t m = 0; m < classes.size(); ++m) total[m] += pixel[m];
      });
      const auto& o = leaves[i].clipped.origin;
      const std::array<int, 4> preferred = {
          assignment[i], class_at(space, map, o[0], o[1], std::int64_t{o[2]} - 1, o[3]),
          class_at(space, map, o[0], o[1], o[2], std::int64_t{o[3]} - 1),
          class_at(space, map, o[0], o[1], std::int64_t{o[2]} - 1,
                   std::int64_t{o[3]} + leaves[i].clipped.extent[3])};
      next[i] = choose_class(total, preferred);
    });
    assignment = std::move(next);
  }

  // Loop 2: variable-size blocks with frozen coefficients.
  if (config.second_loop) {
    classes = best->solution.classes;
    forest = best->solution.forest;
    LoopControl loop2(config, result.loop2, best);
    while (loop2.running()) {
      const auto map = class_map(forest, space);
      const Residuals r = a.residuals(classes, map);
      a.optimise_groups(classes, map, r, true);
      Candidate cand{{classes, forest, choose_flag_indices(forest, space)}, {}};
      cand.cost = a.evaluate(cand.solution);
      const SnapshotCosts snapshot(space, forest, cand.solution.flags, M);
      loop2.offer(std::move(cand));

      const auto tops = space.top_blocks();
      std::vector<PartitionTree> next(tops.size());
      parallel_for(tops.size(), config.jobs, [&](std::size_t i) {
        const CellCostModel model(a, classes, r, snapshot, tops[i]);
        next[i] = optimise_tree(model, space, tops[i]).tree;
      });
      forest = std::move(next);
    }
  }

  // Drop classes no leaf uses.
  PlaneSolution sol = std::move(best->solution);
  std::vector<int> remap(sol.classes.size(), -1);
  for (const auto& tree : sol.forest)
    for (auto leaf : tree.leaves()) remap[static_cast<std::size_t>(tree.node(leaf).class_index)] = 0;
  std::vector<ClassModel> kept;
  for (std::size_t m = 0; m < remap.size(); ++m) {
    if (remap[m] < 0) continue;
    remap[m] = static_cast<int>(kept.size());
    kept.push_back(sol.classes[m]);
  }
  result.removed_classes = static_cast<int>(sol.classes.size() - kept.size());
  for (auto& tree : sol.forest)
    for (auto leaf : tree.leaves())
      tree.set_class(leaf, remap[static_cast<std::size_t>(tree.node(leaf).class_index)]);
  sol.classes = std::move(kept);
  sol.flags = choose_flag_indices(sol.forest, space);
  result.cost = a.evaluate(sol);
  result.solution = std::move(sol);
  return result;
}

}  // namespace lfmrp
