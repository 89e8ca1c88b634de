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

#ifndef LFMRP_OPTIMIZER_HPP
#define LFMRP_OPTIMIZER_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lfmrp/entropy.hpp"
#include "lfmrp/partition.hpp"
#include "lfmrp/prediction.hpp"
#include "lfmrp/side_info.hpp"

namespace lfmrp {

/// Estimated code length split by kind, in bits.
struct CostBreakdown {
  double coefficients = 0;  // B_a
  double flags = 0;         // B_m, partition flags
  double classes = 0;       // B_m, leaf class indices
  double thresholds = 0;    // B_t, thresholds and shape indices
  double residuals = 0;     // B_r

  double side() const { return flags + classes; }
  double total() const { return coefficients + flags + classes + thresholds + residuals; }
};

struct EncoderConfig {
  Mode mode = Mode::kHex;
  int classes = 0;  // 0 selects default_class_count
  int current_support = 20;
  int reference_support = 13;
  int max_iterations = 50;
  int patience = 10;  // stop after this many iterations without improvement
  std::uint64_t seed = 0;  // reserved; every tie-break is deterministic
  TreeGeometry geometry;
  bool second_loop = true;
  bool raw_fallback = true;
  int jobs = 1;
};

/// Sets one `key=value` entry. Keys: mode, classes (or M), current_support,
/// reference_support, max_iterations, patience, seed, top_block,
/// min_spatial, min_angular, second_loop, raw_fallback, jobs.
void apply_config_entry(EncoderConfig& config, const std::string& key, const std::string& value);
/// Reads a key=value file; blank lines and '#' comments are ignored.
EncoderConfig load_config(const std::filesystem::path& path, EncoderConfig base = {});

/// max(8, min(63, ceil(pixels / 2^16))).
int default_class_count(std::size_t pixels);

/// Everything the decoder needs for one MRP-coded plane besides the samples.
struct PlaneSolution {
  std::vector<ClassModel> classes;
  std::vector<PartitionTree> forest;
  FlagIndices flags;
};

struct LoopStats {
  int iterations = 0;
  std::vector<double> accepted;  // J after each accepted iteration
  bool stopped_by_patience = false;
};

struct OptimiserResult {
  PlaneSolution solution;
  CostBreakdown cost;
  LoopStats loop1;
  LoopStats loop2;
  int removed_classes = 0;
};

// --- Building blocks -------------------------------------------------------

/// Deals blocks to classes by increasing variance: the block of rank r goes
/// to class floor(r * classes / n). Ties keep block order.
std::vector<int> init_classes(std::span<const double> variances, int classes);

/// Per-(bin, group, shape) code length sums over one class's pixels, bins
/// 0..kThresholdGrid.
class BinCostTable {
 public:
  BinCostTable();
  double& at(int bin, int group, int shape) {
    return cost_[(static_cast<std::size_t>(bin) * kGroups + group) * kShapeCount + shape];
  }
  double at(int bin, int group, int shape) const {
    return cost_[(static_cast<std::size_t>(bin) * kGroups + group) * kShapeCount + shape];
  }
  /// Adds one pixel's symbol to every group / shape entry of its bin.
  void add(int bin, std::uint32_t symbol, const GroupModelBank& bank, bool all_shapes);
  std::size_t count(int bin) const { return count_[static_cast<std::size_t>(bin)]; }

 private:
  std::vector<double> cost_;
  std::vector<std::size_t> count_;
};

struct GroupChoice {
  std::array<std::uint8_t, kThresholds> thresholds{};
  std::array<std::uint8_t, kGroups> shapes{};
  double bits = 0;  // modelled B_r
};

/// Thresholds minimising the modelled residual cost by dynamic programming
/// over context bins; with `select_shapes` each group also takes its best
/// shape, otherwise all groups are Gaussian. A class whose pixels share one
/// bin gets every threshold collapsed next to that bin.
GroupChoice optimise_thresholds(const BinCostTable& table, bool select_shapes);

/// Group of a pixel in context bin `bin` under grid-index thresholds.
int group_of_bin(int bin, const std::array<std::uint8_t, kThresholds>& thresholds);

/// Bits of the coefficient serialisation (signed Exp-Golomb per mantissa).
double coefficient_bits(const ClassModel& model);
/// Bits of the thresholds (Exp-Golomb deltas) and the 16 three-bit shapes.
double threshold_bits(const ClassModel& model);

/// argmin of `costs`; ties prefer the classes in `preferred` order, then the
/// lowest index.
int choose_class(std::span<const double> costs, std::span<const int> preferred);

/// Additive cost model for the variable-size tree search.
class TreeCostModel {
 public:
  virtual ~TreeCostModel() = default;
  virtual int classes() const = 0;
  /// Residual plus class-index cost of coding the block as one leaf of class m.
  virtual double leaf_cost(const Block4D& nominal, int m) const = 0;
  /// Cost of the flag choosing `kind` at this block (0 for a forced leaf).
  virtual double flag_cost(const Block4D& nominal, NodeKind kind) const = 0;
};

struct TreeSearchResult {
  PartitionTree tree;
  double cost = 0;
};

/// Bottom-up choice between leaf and each legal split; a split is taken only
/// when strictly cheaper. Leaf classes tie towards the lowest index.
TreeSearchResult optimise_tree(const TreeCostModel& model, const PartitionSpace& space,
                               const Block4D& top);

// --- Plane-level machinery -------------------------------------------------

/// Prediction residual state of a plane under a class map.
struct Residuals {
  std::vector<std::int32_t> abs_error;
  std::vector<std::uint32_t> symbol;
  std::vector<std::uint8_t> bin;
};

class PlaneAnalysis {
 public:
  PlaneAnalysis(const Plane& plane, const EncoderConfig& config);

  const Plane& plane() const { return plane_; }
  const Predictor& predictor() const { return predictor_; }
  const PartitionSpace& space() const { return space_; }
  const GroupModelBank& bank() const { return bank_; }
  const EncoderConfig& config() const { return config_; }

  Residuals residuals(const std::vector<ClassModel>& classes,
                      const std::vector<std::int16_t>& class_map) const;
  /// Sum of model code lengths over all pixels (B_r).
  double residual_cost(const std::vector<ClassModel>& classes,
                       const std::vector<std::int16_t>& class_map, const Residuals& r) const;
  /// Re-optimises thresholds (and shapes when asked) for every class.
  void optimise_groups(std::vector<ClassModel>& classes,
                       const std::vector<std::int16_t>& class_map, const Residuals& r,
                       bool select_shapes) const;
  CostBreakdown evaluate(const PlaneSolution& solution) const;

  /// Forest whose leaves are the fixed-size blocks of the first loop.
  std::vector<PartitionTree> fixed_forest() const;

 private:
  const Plane& plane_;
  EncoderConfig config_;
  Predictor predictor_;
  PartitionSpace space_;
  GroupModelBank bank_;
};

/// The two optimisation loops for one plane.
OptimiserResult run_encoder_loops(const Plane& plane, const EncoderConfig& config);

}  // namespace lfmrp

#endif  // LFMRP_OPTIMIZER_HPP
