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

#include <filesystem>
#include <random>

#include "doctest.h"
#include "gen.hpp"
#include "lfmrp/error.hpp"
#include "lfmrp/lightfield.hpp"

using namespace lfmrp;
namespace fs = std::filesystem;

namespace {

// Hand-built container bytes, independent of serialize().
std::vector<std::uint8_t> header_bytes(std::uint32_t t, std::uint32_t s, std::uint32_t v,
                                       std::uint32_t u, int planes, int depth) {
  std::vector<std::uint8_t> b = {'L', 'F', '4', 'D', 1};
  for (std::uint32_t x : {t, s, v, u})
    for (int k = 0; k < 4; ++k) b.push_back(static_cast<std::uint8_t>(x >> (8 * k)));
  b.push_back(static_cast<std::uint8_t>(planes));
  b.push_back(static_cast<std::uint8_t>(depth));
  return b;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("lfmrp_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("lightfield") {

TEST_CASE("all-zero container parses to zero samples") {
  auto bytes = header_bytes(4, 4, 8, 8, 1, 8);
  bytes.resize(bytes.size() + 2 * 1024, 0);
  const auto lf = parse(bytes);
  CHECK(lf.dims() == Dims4{4, 4, 8, 8});
  CHECK(lf.samples().size() == 1024);
  for (auto x : lf.samples()) CHECK(x == 0);
  CHECK(serialize(lf) == bytes);
}

TEST_CASE("large header is readable without its payload") {
  const auto h = parse_header(header_bytes(13, 13, 625, 434, 3, 10));
  CHECK(h.dims == Dims4{13, 13, 625, 434});
  CHECK(h.bit_depth == 10);
  CHECK(h.planes == 3);
}

TEST_CASE("store then load is byte identical") {
  gen::Rng rng(3);
  const auto dir = scratch("store");
  for (int i = 0; i < 10; ++i) {
    const auto lf = gen::lightfield(rng, gen::dims(rng, 1, 6), i % 2 ? 3 : 1, i % 3 ? 10 : 8);
    const auto file = dir / "x.lf4d";
    store(lf, file, Layout::kPlanarRaw);
    const auto original = read_file(file);
    const auto back = load(file, Layout::kPlanarRaw);
    CHECK(back == lf);
    store(back, dir / "y.lf4d", Layout::kPlanarRaw);
    CHECK(read_file(dir / "y.lf4d") == original);

    const auto grid = dir / ("grid" + std::to_string(i));
    store(lf, grid, Layout::kSaiGrid);
    CHECK(load(grid, Layout::kSaiGrid) == lf);
  }
  fs::remove_all(dir);
}

TEST_CASE("malformed containers are rejected") {
  auto bytes = header_bytes(2, 2, 2, 2, 1, 8);
  bytes.resize(bytes.size() + 31, 0);
  CHECK_THROWS_AS(parse(bytes), Error);  // one byte short
  bytes.resize(bytes.size() + 2, 0);
  CHECK_THROWS_AS(parse(bytes), Error);  // one byte long
  auto bad = header_bytes(2, 2, 2, 2, 2, 8);
  CHECK_THROWS_AS(parse_header(bad), Error);
  bad = header_bytes(2, 2, 2, 2, 1, 8);
  bad[0] = 'X';
  CHECK_THROWS_AS(parse_header(bad), Error);
  // sample above the declared depth
  auto over = header_bytes(1, 1, 1, 1, 1, 8);
  over.push_back(0);
  over.push_back(1);
  CHECK_THROWS_AS(parse(over), Error);
}

TEST_CASE("causal neighbours") {
  const Dims4 d{3, 3, 4, 4};
  CHECK(causal_neighbors({0, 0}, d).empty());
  const std::vector<CausalNeighbor> inner = {{NeighborRole::kLeft, {1, 0}},
                                             {NeighborRole::kTopLeft, {0, 0}},
                                             {NeighborRole::kTop, {0, 1}},
                                             {NeighborRole::kTopRight, {0, 2}}};
  CHECK(causal_neighbors({1, 1}, d) == inner);
  const std::vector<CausalNeighbor> top_row = {{NeighborRole::kLeft, {0, 1}}};
  CHECK(causal_neighbors({0, 2}, d) == top_row);

  // every neighbour precedes the SAI in raster order and is adjacent
  for (std::uint32_t t = 0; t < 3; ++t)
    for (std::uint32_t s = 0; s < 3; ++s)
      for (const auto& n : causal_neighbors({t, s}, d)) {
        CHECK(n.sai.t * 3 + n.sai.s < t * 3 + s);
        CHECK(t - n.sai.t <= 1);
        CHECK((n.sai.s + 1 >= s && n.sai.s <= s + 1));
      }
}

TEST_CASE("bits per pixel") {
  const Dims4 d{4, 4, 8, 8};
  const std::vector<std::uint64_t> one = {1024, 0, 0};
  CHECK(bpp(one, d) == doctest::Approx(1.0));
  const std::vector<std::uint64_t> none = {0, 0, 0};
  CHECK(bpp(none, d) == 0.0);
}

}  // TEST_SUITE
