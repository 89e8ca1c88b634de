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

#include <cstdio>

#include "lfmrp/codec.hpp"

namespace lfmrp {

namespace {

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string dims_text(const Dims4& d) {
  return std::to_string(d.t) + "x" + std::to_string(d.s) + "x" + std::to_string(d.v) + "x" +
         std::to_string(d.u);
}

std::string history(const std::vector<double>& xs) {
  std::string out;
  for (double x : xs) {
    if (!out.empty()) out += ',';
    out += num(x);
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> report_fields(const EncodeReport& r) {
  std::vector<std::pair<std::string, std::string>> f;
  f.emplace_back("dims", dims_text(r.dims));
  f.emplace_back("planes", std::to_string(r.planes));
  f.emplace_back("bit_depth", std::to_string(r.bit_depth));
  f.emplace_back("mode", to_string(r.mode));
  f.emplace_back("rct", r.rct ? "1" : "0");
  f.emplace_back("bytes", std::to_string(r.bytes));
  f.emplace_back("bpp", num(r.bpp));
  for (std::size_t i = 0; i < r.plane_reports.size(); ++i) {
    const auto& p = r.plane_reports[i];
    const std::string k = "plane" + std::to_string(i) + ".";
    f.emplace_back(k + "kind", to_string(p.kind));
    f.emplace_back(k + "packed", p.packed ? "1" : "0");
    f.emplace_back(k + "alphabet", std::to_string(p.alphabet));
    f.emplace_back(k + "bytes", std::to_string(p.bytes));
    f.emplace_back(k + "bpp", num(p.bpp));
    if (p.classes == 0) continue;
    f.emplace_back(k + "classes", std::to_string(p.classes));
    f.emplace_back(k + "removed_classes", std::to_string(p.removed_classes));
    f.emplace_back(k + "B_a", num(p.estimate.coefficients));
    f.emplace_back(k + "B_m_flags", num(p.estimate.flags));
    f.emplace_back(k + "B_m_class", num(p.estimate.classes));
    f.emplace_back(k + "B_t", num(p.estimate.thresholds));
    f.emplace_back(k + "B_r", num(p.estimate.residuals));
    f.emplace_back(k + "J", num(p.estimate.total()));
    f.emplace_back(k + "body_bits", num(p.body_bits));
    f.emplace_back(k + "loop1_iterations", std::to_string(p.loop1.iterations));
    f.emplace_back(k + "loop2_iterations", std::to_string(p.loop2.iterations));
    f.emplace_back(k + "loop1_J", history(p.loop1.accepted));
    f.emplace_back(k + "loop2_J", history(p.loop2.accepted));
    f.emplace_back(k + "leaves", std::to_string(p.node_kinds[0]));
    f.emplace_back(k + "hex_splits", std::to_string(p.node_kinds[1]));
    f.emplace_back(k + "spatial_splits", std::to_string(p.node_kinds[2]));
    f.emplace_back(k + "angular_splits", std::to_string(p.node_kinds[3]));
    f.emplace_back(k + "quad_splits", std::to_string(p.node_kinds[4]));
    for (const auto& [size, count] : p.leaf_sizes)
      f.emplace_back(k + "leaf." + size, std::to_string(count));
  }
  return f;
}

std::vector<std::pair<std::string, std::string>> report_fields(const StreamInfo& info) {
  std::vector<std::pair<std::string, std::string>> f;
  f.emplace_back("dims", dims_text(info.dims));
  f.emplace_back("planes", std::to_string(info.planes));
  f.emplace_back("bit_depth", std::to_string(info.bit_depth));
  f.emplace_back("mode", to_string(info.mode));
  f.emplace_back("rct", info.rct ? "1" : "0");
  f.emplace_back("current_support", std::to_string(info.current_support));
  f.emplace_back("reference_support", std::to_string(info.reference_support));
  f.emplace_back("top_block", std::to_string(info.geometry.top_block));
  f.emplace_back("min_spatial", std::to_string(info.geometry.min_spatial));
  f.emplace_back("min_angular", std::to_string(info.geometry.min_angular));
  f.emplace_back("bytes", std::to_string(info.bytes));
  f.emplace_back("bpp", num(8.0 * static_cast<double>(info.bytes) /
                            static_cast<double>(info.dims.count())));
  for (std::size_t i = 0; i < info.plane_reports.size(); ++i) {
    const auto& p = info.plane_reports[i];
    const std::string k = "plane" + std::to_string(i) + ".";
    f.emplace_back(k + "kind", to_string(p.kind));
    f.emplace_back(k + "packed", p.packed ? "1" : "0");
    f.emplace_back(k + "alphabet", std::to_string(p.alphabet));
    f.emplace_back(k + "classes", std::to_string(p.classes));
    f.emplace_back(k + "bytes", std::to_string(p.bytes));
    f.emplace_back(k + "bpp", num(p.bpp));
  }
  return f;
}

}  // namespace lfmrp
