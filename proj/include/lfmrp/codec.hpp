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

#ifndef LFMRP_CODEC_HPP
#define LFMRP_CODEC_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lfmrp/lightfield.hpp"
#include "lfmrp/optimizer.hpp"
#include "lfmrp/preprocess.hpp"

namespace lfmrp {

inline constexpr std::uint8_t kStreamVersion = 1;

enum class PlaneKind : std::uint8_t { kFlat = 0, kRaw = 1, kMrp = 2 };
std::string to_string(PlaneKind kind);

/// One residual coding step, reported identically by encoder and decoder.
struct TraceEvent {
  int plane = 0;
  std::size_t pixel = 0;
  int cls = 0;
  int group = 0;
  int shape = 0;
  std::int32_t prediction = 0;
  std::uint32_t symbol = 0;
  bool operator==(const TraceEvent&) const = default;
};
using TraceFn = std::function<void(const TraceEvent&)>;

struct PlaneReport {
  PlaneKind kind = PlaneKind::kFlat;
  bool packed = false;
  std::int32_t alphabet = 0;
  int classes = 0;
  std::size_t bytes = 0;  // size of the plane section
  double bpp = 0;         // bytes * 8 / (T * S * V * U)
  double body_bits = 0;   // range-coded side information and residuals
  CostBreakdown estimate;
  LoopStats loop1;
  LoopStats loop2;
  int removed_classes = 0;
  /// Leaf count per nominal extent "TxSxVxU".
  std::map<std::string, std::size_t> leaf_sizes;
  /// Node count per kind: leaf, hex, spatial, angular, quad.
  std::array<std::size_t, 5> node_kinds{};
};

struct EncodeReport {
  Dims4 dims;
  int planes = 0;
  int bit_depth = 0;
  Mode mode = Mode::kHex;
  bool rct = false;
  std::size_t bytes = 0;
  double bpp = 0;  // file size in bits over T * S * V * U
  std::vector<PlaneReport> plane_reports;
};

/// Header fields and section layout, parsed without decoding the body.
struct StreamInfo {
  Dims4 dims;
  int planes = 0;
  int bit_depth = 0;
  Mode mode = Mode::kHex;
  bool rct = false;
  int current_support = 0;
  int reference_support = 0;
  TreeGeometry geometry;
  std::size_t bytes = 0;
  std::vector<PlaneReport> plane_reports;  // kind, packed, alphabet, classes, bytes, bpp
};

/// Coding-domain planes: the RCT is applied to 3-plane input when `rct`
/// is set; chroma planes carry a +2^bit_depth offset.
std::vector<Plane> to_coding_planes(const LightField4D& lf, bool rct);
LightField4D from_coding_planes(const std::vector<Plane>& planes, int bit_depth, bool rct);

std::vector<std::uint8_t> encode_lightfield(const LightField4D& lf, const EncoderConfig& config,
                                            EncodeReport* report = nullptr,
                                            const TraceFn& trace = {});
LightField4D decode_lightfield(std::span<const std::uint8_t> stream, const TraceFn& trace = {});
StreamInfo inspect_stream(std::span<const std::uint8_t> stream);

/// Baseline without inter-SAI prediction: every SAI is predicted from its
/// own causal pixels only (2D quadtree partition, no reference supports).
EncoderConfig intra_only(EncoderConfig config);

/// Flat key/value view of a report, keys like "bpp" or "plane0.B_r".
std::vector<std::pair<std::string, std::string>> report_fields(const EncodeReport& report);
std::vector<std::pair<std::string, std::string>> report_fields(const StreamInfo& info);

/// CRC-32 of the samples serialised as little-endian 16-bit words.
std::uint32_t sample_checksum(const LightField4D& lf);

}  // namespace lfmrp

#endif  // LFMRP_CODEC_HPP
