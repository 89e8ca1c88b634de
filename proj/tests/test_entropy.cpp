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
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "gen.hpp"
#include "lfmrp/bitio.hpp"
#include "lfmrp/entropy.hpp"
#include "lfmrp/error.hpp"

using namespace lfmrp;

namespace {

double entropy_bits(const std::vector<double>& p) {
  double h = 0;
  for (double x : p)
    if (x > 0) h -= x * std::log2(x);
  return h;
}

std::vector<std::uint32_t> random_freqs(gen::Rng& rng, int n) {
  // n positive frequencies summing to kScale
  std::vector<std::uint32_t> f(static_cast<std::size_t>(n), 1);
  std::uint32_t left = kScale - static_cast<std::uint32_t>(n);
  std::vector<double> w(f.size());
  double sum = 0;
  for (auto& x : w) sum += (x = std::pow(std::uniform_real_distribution<double>(0, 1)(rng), 3));
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto add = static_cast<std::uint32_t>(w[i] / sum * left);
    f[i] += add;
  }
  f.back() += kScale - std::accumulate(f.begin(), f.end(), 0u);
  return f;
}

}  // namespace

TEST_SUITE("entropy") {

TEST_CASE("residual fold is a bijection onto the alphabet") {
  for (std::int32_t alphabet : {1, 2, 3, 16, 257}) {
    for (std::int32_t pred = 0; pred < alphabet; ++pred) {
      std::vector<bool> seen(static_cast<std::size_t>(alphabet), false);
      for (std::int32_t x = 0; x < alphabet; ++x) {
        const auto f = fold_residual(x, pred, alphabet);
        REQUIRE(f < static_cast<std::uint32_t>(alphabet));
        REQUIRE_FALSE(seen[f]);
        seen[f] = true;
        REQUIRE(unfold_residual(f, pred, alphabet) == x);
      }
    }
  }
  // interleave near the prediction
  CHECK(fold_residual(10, 10, 100) == 0u);
  CHECK(fold_residual(11, 10, 100) == 1u);
  CHECK(fold_residual(9, 10, 100) == 2u);
}

TEST_CASE("gaussian table entropy matches the differential entropy") {
  const auto g = GroupModel::build(16.0, kGaussianShape, 256);
  const double expected = 0.5 * std::log2(2 * std::numbers::pi * std::numbers::e * 16.0);
  CHECK(std::abs(entropy_bits(g.pmf()) - expected) < 0.1);
}

TEST_CASE("group tables are symmetric, positive and normalised") {
  for (int shape = 0; shape < kShapeCount; ++shape)
    for (double var : {0.01, 1.0, 30.0, 5000.0}) {
      const auto g = GroupModel::build(var, shape, 300);
      std::uint32_t total = 0;
      for (std::int32_t f = 0; f < g.coded_symbols(); ++f) {
        CHECK(g.freq(static_cast<std::uint32_t>(f)) >= 1u);
        total += g.freq(static_cast<std::uint32_t>(f));
      }
      CHECK(total == kScale);
      // +e and -e share a weight
      for (std::uint32_t m = 1; 2 * m < static_cast<std::uint32_t>(g.coded_symbols()); ++m)
        CHECK(g.freq(2 * m - 1) == g.freq(2 * m));
    }
}

TEST_CASE("smaller variance puts more mass at zero") {
  double last = 2.0;
  for (double var : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0, 256.0}) {
    const double p0 = GroupModel::build(var, kGaussianShape, 1024).pmf()[0];
    CHECK(p0 < last);
    last = p0;
  }
}

TEST_CASE("uniform 16-symbol stream costs four bits per symbol") {
  gen::Rng rng(1);
  std::vector<std::uint32_t> freqs(16, kScale / 16);
  RangeEncoder enc;
  for (int i = 0; i < 10000; ++i)
    encode_with_freqs(enc, freqs, static_cast<int>(gen::uniform(rng, 0, 15)));
  const double bits = 8.0 * static_cast<double>(enc.finish().size());
  CHECK(std::abs(bits - 40000.0) <= 64.0);
}

TEST_CASE("empty stream") {
  RangeEncoder enc;
  const auto bytes = enc.finish();
  CHECK(bytes.size() <= 5);
  RangeDecoder dec(bytes);  // nothing to decode; construction must not fail
}

TEST_CASE("random streams roundtrip within the length bound") {
  gen::Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int models = static_cast<int>(gen::uniform(rng, 1, 4));
    std::vector<std::vector<std::uint32_t>> tables;
    for (int m = 0; m < models; ++m)
      tables.push_back(random_freqs(rng, static_cast<int>(gen::uniform(rng, 2, 40))));
    const auto n = gen::uniform(rng, 0, 3000);
    std::vector<std::pair<int, int>> stream;
    double ideal = 0;
    RangeEncoder enc;
    for (std::uint32_t i = 0; i < n; ++i) {
      const int m = static_cast<int>(gen::uniform(rng, 0, static_cast<std::uint32_t>(models - 1)));
      const auto& f = tables[static_cast<std::size_t>(m)];
      const int s = static_cast<int>(gen::uniform(rng, 0, static_cast<std::uint32_t>(f.size() - 1)));
      stream.emplace_back(m, s);
      ideal -= std::log2(static_cast<double>(f[static_cast<std::size_t>(s)]) / kScale);
      encode_with_freqs(enc, f, s);
    }
    const auto bytes = enc.finish();
    CHECK(8.0 * static_cast<double>(bytes.size()) <= ideal + 32.0);
    RangeDecoder dec(bytes);
    for (const auto& [m, s] : stream)
      REQUIRE(decode_with_freqs(dec, tables[static_cast<std::size_t>(m)]) == s);
  }
}

TEST_CASE("group models with escape roundtrip") {
  gen::Rng rng(9);
  const std::int32_t alphabet = 1 << 14;  // larger than the coded table
  const auto g = GroupModel::build(4000.0, 2, alphabet);
  CHECK(g.has_escape());
  std::vector<std::uint32_t> symbols(2000);
  RangeEncoder enc;
  for (auto& s : symbols) {
    s = gen::uniform(rng, 0, static_cast<std::uint32_t>(alphabet - 1));
    g.encode(enc, s);
  }
  const auto bytes = enc.finish();
  RangeDecoder dec(bytes);
  for (auto s : symbols) REQUIRE(g.decode(dec) == s);
}

TEST_CASE("adaptive model and raw bits interleave") {
  gen::Rng rng(4);
  AdaptiveModel a(7);
  RangeEncoder enc;
  std::vector<std::pair<int, std::uint32_t>> seq;
  for (int i = 0; i < 5000; ++i) {
    const int s = static_cast<int>(gen::uniform(rng, 0, 2) * gen::uniform(rng, 0, 3));
    const auto bits = gen::uniform(rng, 0, 1023);
    a.encode(enc, s);
    enc.encode_bits(bits, 10);
    seq.emplace_back(s, bits);
  }
  const auto bytes = enc.finish();
  AdaptiveModel b(7);
  RangeDecoder dec(bytes);
  for (const auto& [s, bits] : seq) {
    REQUIRE(b.decode(dec) == s);
    REQUIRE(dec.decode_bits(10) == bits);
  }
}

TEST_CASE("exp-golomb codes") {
  gen::Rng rng(6);
  BitWriter w;
  std::vector<std::int64_t> values;
  for (int i = 0; i < 2000; ++i) {
    const auto v = static_cast<std::int64_t>(gen::uniform(rng, 0, 70000)) - 35000;
    values.push_back(v);
    w.put_se(v);
  }
  std::size_t expected_bits = 0;
  for (auto v : values) expected_bits += BitWriter::se_length(v);
  const auto& bytes = w.bytes();
  CHECK(w.bit_count() == expected_bits);
  CHECK(bytes.size() == (expected_bits + 7) / 8);
  BitReader r(bytes);
  for (auto v : values) REQUIRE(r.get_se() == v);
  CHECK(BitWriter::ue_length(0) == 1);
  CHECK(BitWriter::ue_length(1) == 3);
  CHECK(BitWriter::ue_length(6) == 5);
}

}  // TEST_SUITE
