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

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "doctest.h"
#include "gen.hpp"
#include "lfmrp/codec.hpp"
#include "lfmrp/error.hpp"
#include "lfmrp/optimizer.hpp"
#include "lfmrp/synth.hpp"
#include "tree_oracle.hpp"

using namespace lfmrp;

namespace {

// Minimum modelled cost over all non-decreasing group assignments of the
// occupied bins; groups share one shape. Bin 192 always sits in group 15.
double threshold_oracle(const BinCostTable& table, const std::vector<int>& bins, bool shapes) {
  const int k = static_cast<int>(bins.size());
  std::vector<int> g(static_cast<std::size_t>(k), 0);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(int, int)> rec = [&](int i, int lo) {
    if (i == k) {
      double total = 0;
      for (int n = 0; n < kGroups; ++n) {
        double group_best = std::numeric_limits<double>::infinity();
        bool any = false;
        for (int s = shapes ? 0 : kGaussianShape; s < kShapeCount; ++s) {
          double c = 0;
          for (int j = 0; j < k; ++j)
            if (g[j] == n) {
              c += table.at(bins[j], n, s);
              any = true;
            }
          group_best = std::min(group_best, c);
        }
        if (any) total += group_best;
      }
      best = std::min(best, total);
      return;
    }
    for (int v = lo; v < kGroups; ++v) {
      if (bins[i] == kThresholdGrid && v != kGroups - 1) continue;
      g[i] = v;
      rec(i + 1, v);
    }
  };
  rec(0, 0);
  return best;
}

double choice_cost(const BinCostTable& table, const std::vector<int>& bins, const GroupChoice& c) {
  double sum = 0;
  for (int b : bins) {
    const int n = group_of_bin(b, c.thresholds);
    sum += table.at(b, n, c.shapes[n]);
  }
  return sum;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("class count default") {
  CHECK(default_class_count(1) == 8);
  CHECK(default_class_count(std::size_t{1} << 20) == 16);
  CHECK(default_class_count(std::size_t{1} << 40) == 63);
}

TEST_CASE("initial classes by variance") {
  const std::vector<double> v = {5, 1, 3};
  CHECK(init_classes(v, 1) == std::vector<int>{0, 0, 0});
  CHECK(init_classes(std::vector<double>{0, 100}, 2) == std::vector<int>{0, 1});
  CHECK(init_classes(std::vector<double>{100, 0}, 2) == std::vector<int>{1, 0});
  gen::Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> var(gen::uniform(rng, 1, 200));
    for (auto& x : var) x = gen::uniform(rng, 0, 50);
    const int m = static_cast<int>(gen::uniform(rng, 1, 20));
    const auto cls = init_classes(var, m);
    // monotone in variance, and class sizes differ by at most one
    for (std::size_t i = 0; i < var.size(); ++i)
      for (std::size_t j = 0; j < var.size(); ++j)
        if (var[i] < var[j]) CHECK(cls[i] <= cls[j]);
    std::vector<int> size(static_cast<std::size_t>(m), 0);
    for (int c : cls) ++size[static_cast<std::size_t>(c)];
    const auto [lo, hi] = std::minmax_element(size.begin(), size.end());
    if (static_cast<int>(var.size()) >= m) CHECK(*hi - *lo <= 1);
  }
}

TEST_CASE("threshold dynamic programme matches enumeration") {
  gen::Rng rng(22);
  const GroupModelBank bank(256);
  for (int trial = 0; trial < 1000; ++trial) {
    const bool shapes = trial % 2 == 1;
    std::vector<int> bins;
    const int k = static_cast<int>(gen::uniform(rng, 1, 4));
    while (static_cast<int>(bins.size()) < k) {
      const int b = trial % 7 == 0 && bins.empty()
                        ? kThresholdGrid
                        : static_cast<int>(gen::uniform(rng, 1, kThresholdGrid));
      if (std::find(bins.begin(), bins.end(), b) == bins.end()) bins.push_back(b);
    }
    std::sort(bins.begin(), bins.end());
    BinCostTable table;
    for (int b : bins) {
      const auto spread = gen::uniform(rng, 0, 40);
      for (auto n = gen::uniform(rng, 1, 30); n > 0; --n)
        table.add(b, gen::uniform(rng, 0, spread), bank, shapes);
    }
    const auto choice = optimise_thresholds(table, shapes);
    const double expect = threshold_oracle(table, bins, shapes);
    REQUIRE(choice.bits == doctest::Approx(expect).epsilon(1e-12));
    REQUIRE(choice_cost(table, bins, choice) == doctest::Approx(expect).epsilon(1e-12));
    for (int i = 1; i < kThresholds; ++i) REQUIRE(choice.thresholds[i - 1] <= choice.thresholds[i]);
  }
}

TEST_CASE("threshold lands between two context clusters") {
  const GroupModelBank bank(256);
  gen::Rng rng(23);
  BinCostTable table;
  // quiet pixels in bin 10, noisy ones in bin 120
  for (int i = 0; i < 400; ++i) table.add(10, gen::uniform(rng, 0, 1), bank, false);
  for (int i = 0; i < 400; ++i) table.add(120, gen::uniform(rng, 0, 150), bank, false);
  const auto c = optimise_thresholds(table, false);
  CHECK(group_of_bin(10, c.thresholds) < group_of_bin(120, c.thresholds));
  bool between = false;
  for (auto t : c.thresholds) between = between || (t >= 10 && t < 120);
  CHECK(between);
}

TEST_CASE("single-bin classes collapse their thresholds") {
  const GroupModelBank bank(256);
  for (int bin : {1, 57, kThresholdGrid}) {
    BinCostTable table;
    for (std::uint32_t s = 0; s < 9; ++s) table.add(bin, s, bank, true);
    const auto c = optimise_thresholds(table, true);
    for (auto t : c.thresholds) CHECK(std::abs(static_cast<int>(t) - bin) <= 1);
    CHECK(choice_cost(table, {bin}, c) == doctest::Approx(c.bits));
  }
}

TEST_CASE("class choice ties") {
  const std::vector<double> costs = {3, 1, 1, 1};
  CHECK(choose_class(costs, std::vector<int>{}) == 1);
  CHECK(choose_class(costs, std::vector<int>{2, 3}) == 2);
  CHECK(choose_class(costs, std::vector<int>{0, 3}) == 3);
  CHECK(choose_class(costs, std::vector<int>{-1, 7}) == 1);
}

TEST_CASE("tree search examples") {
  const PartitionSpace space(Mode::kDual, Dims4{4, 4, 8, 8}, TreeGeometry{8, 2, 2});
  const auto top = space.top_blocks()[0];
  auto flag = [&](const Block4D& b, NodeKind k) {
    return oracle::legal_kinds(space, b).empty() ? 0.0 : (k == NodeKind::kLeaf ? 0.1 : 2.0);
  };
  SUBCASE("homogeneous block stays a leaf") {
    std::vector<double> px(space.lf_dims().count() * 3, 5.0);
    for (std::size_t p = 0; p < space.lf_dims().count(); ++p) px[p * 3 + 1] = 0.0;
    const oracle::PixelCostModel model(space, 3, px, {0, 0, 0}, flag);
    const auto r = optimise_tree(model, space, top);
    CHECK(r.tree.size() == 1);
    CHECK(r.tree.node(0).class_index == 1);
  }
  SUBCASE("angular quadrants with distinct classes split angularly") {
    std::vector<double> px(space.lf_dims().count() * 4, 9.0);
    for (std::uint32_t t = 0; t < 4; ++t)
      for (std::uint32_t s = 0; s < 4; ++s)
        for (std::uint32_t v = 0; v < 8; ++v)
          for (std::uint32_t u = 0; u < 8; ++u) {
            const std::size_t p = space.pixel({t, s, v, u});
            px[p * 4 + (t / 2) * 2 + s / 2] = 0.0;
          }
    const oracle::PixelCostModel model(space, 4, px, {0, 0, 0, 0}, flag);
    const auto r = optimise_tree(model, space, top);
    CHECK(r.tree.node(0).kind == NodeKind::kAngularSplit);
    for (int j = 0; j < 4; ++j) {
      const auto& c = r.tree.node(r.tree.child(0, j));
      CHECK(c.kind == NodeKind::kLeaf);
      CHECK(c.class_index == j);
    }
  }
}

TEST_CASE("tree search equals exhaustive enumeration on random costs") {
  gen::Rng rng(24);
  struct Setup {
    Mode mode;
    Dims4 dims;
    TreeGeometry geo;
  };
  const std::vector<Setup> setups = {
      {Mode::kHex, {8, 8, 8, 8}, {8, 2, 2}},
      {Mode::kDual, {8, 8, 8, 8}, {8, 4, 2}},
      {Mode::kQuad2d, {2, 2, 8, 8}, {16, 2, 2}},
      {Mode::kHex, {5, 7, 6, 8}, {8, 2, 2}},
      {Mode::kDual, {3, 6, 8, 5}, {8, 4, 2}},
  };
  for (const auto& su : setups) {
    const PartitionSpace space(su.mode, su.dims, su.geo);
    for (int trial = 0; trial < 3; ++trial) {
      const int m = static_cast<int>(gen::uniform(rng, 1, 4));
      std::vector<double> px(su.dims.count() * static_cast<std::size_t>(m));
      for (auto& x : px) x = std::uniform_real_distribution<double>(0, 3)(rng);
      std::vector<double> cls(static_cast<std::size_t>(m));
      for (auto& x : cls) x = std::uniform_real_distribution<double>(0, 5)(rng);
      const double fl = std::uniform_real_distribution<double>(0, 4)(rng);
      auto flag = [&](const Block4D& b, NodeKind k) {
        if (oracle::legal_kinds(space, b).empty()) return 0.0;
        return k == NodeKind::kLeaf ? fl * 0.25 : fl + 0.01 * static_cast<int>(k);
      };
      const oracle::PixelCostModel model(space, m, px, cls, flag);
      for (const auto& top : space.top_blocks()) {
        const auto r = optimise_tree(model, space, top);
        const auto all = oracle::all_tree_costs(model, space, top);
        CHECK(static_cast<double>(all.size()) == oracle::count_trees(space, top));
        CHECK(r.cost == *std::min_element(all.begin(), all.end()));
        CHECK(oracle::tree_cost(model, r.tree) == r.cost);
      }
    }
  }
}

TEST_CASE("encoder loops") {
  EncoderConfig cfg;
  cfg.max_iterations = 12;
  cfg.patience = 4;

  SUBCASE("constant light field") {
    const auto lf = synth::constant(Dims4{4, 4, 8, 8}, 1, 8, 93);
    const auto plane = gen::plane_of(lf);
    for (int mode = 0; mode < 3; ++mode) {
      cfg.mode = static_cast<Mode>(mode);
      const auto r = run_encoder_loops(plane, cfg);
      CHECK(r.loop1.accepted.size() <= 2);
      CHECK(r.cost.residuals / static_cast<double>(lf.dims().count()) < 0.05);
    }
  }

  SUBCASE("accepted J never increases and loop 2 never hurts") {
    gen::Rng rng(25);
    for (int trial = 0; trial < 6; ++trial) {
      cfg.mode = static_cast<Mode>(trial % 3);
      const auto lf = synth::shifted(gen::dims(rng, 3, 12), 1, 8, 1, rng());
      const auto plane = gen::plane_of(lf);
      const auto full = run_encoder_loops(plane, cfg);
      std::vector<double> seq = full.loop1.accepted;
      seq.insert(seq.end(), full.loop2.accepted.begin(), full.loop2.accepted.end());
      for (std::size_t i = 1; i < seq.size(); ++i) CHECK(seq[i] <= seq[i - 1]);
      CHECK(full.loop1.iterations <= cfg.max_iterations);
      CHECK(full.loop2.iterations <= cfg.max_iterations);

      auto no_second = cfg;
      no_second.second_loop = false;
      const auto first_only = run_encoder_loops(plane, no_second);
      CHECK(first_only.cost.total() >= full.cost.total() - 1e-6);

      // the reported cost is the exact cost of the returned solution
      const PlaneAnalysis a(plane, cfg);
      const auto again = a.evaluate(full.solution);
      CHECK(again.total() == doctest::Approx(full.cost.total()));
    }
  }

  SUBCASE("an unused class leaves B_r alone and adds to B_a") {
    const auto lf = synth::shifted(Dims4{3, 3, 12, 12}, 1, 8, 1, 99);
    const auto plane = gen::plane_of(lf);
    cfg.mode = Mode::kHex;
    const auto r = run_encoder_loops(plane, cfg);
    const PlaneAnalysis a(plane, cfg);
    auto bigger = r.solution;
    bigger.classes.push_back(bigger.classes.front());
    const auto base = a.evaluate(r.solution);
    const auto more = a.evaluate(bigger);
    CHECK(more.residuals == doctest::Approx(base.residuals));
    CHECK(more.coefficients > base.coefficients);
  }
}

TEST_CASE("configuration entries") {
  EncoderConfig c;
  apply_config_entry(c, "mode", "dt");
  apply_config_entry(c, "M", "12");
  apply_config_entry(c, "MAX_ITERATIONS", "7");
  apply_config_entry(c, "top_block", "16");
  CHECK(c.mode == Mode::kDual);
  CHECK(c.classes == 12);
  CHECK(c.max_iterations == 7);
  CHECK(c.geometry.top_block == 16);
  CHECK_THROWS_AS(apply_config_entry(c, "bogus", "1"), Error);
  CHECK_THROWS_AS(apply_config_entry(c, "patience", "x"), Error);
}

}  // TEST_SUITE
