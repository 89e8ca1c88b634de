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

#ifndef LFMRP_LIGHTFIELD_HPP
#define LFMRP_LIGHTFIELD_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace lfmrp {

/// Extents of a 4D light field: (T, S) sub-aperture grid, (V, U) pixels per
/// sub-aperture image.
struct Dims4 {
  std::uint32_t t = 0;
  std::uint32_t s = 0;
  std::uint32_t v = 0;
  std::uint32_t u = 0;

  std::size_t count() const {
    return std::size_t{t} * s * v * u;
  }
  std::size_t sai_count() const { return std::size_t{t} * s; }
  std::size_t sai_size() const { return std::size_t{v} * u; }

  bool operator==(const Dims4&) const = default;
};

struct SaiCoord {
  std::uint32_t t = 0;
  std::uint32_t s = 0;
  bool operator==(const SaiCoord&) const = default;
};

struct PixelCoord {
  std::uint32_t v = 0;
  std::uint32_t u = 0;
  bool operator==(const PixelCoord&) const = default;
};

/// Integer samples L(t, s, v, u) for one or three colour planes. Samples are
/// kept as 16-bit values regardless of the declared bit depth.
class LightField4D {
 public:
  LightField4D() = default;
  LightField4D(Dims4 dims, int planes, int bit_depth);

  const Dims4& dims() const { return dims_; }
  int planes() const { return planes_; }
  int bit_depth() const { return bit_depth_; }
  std::uint32_t max_sample() const { return (1u << bit_depth_) - 1u; }

  std::size_t index(std::uint32_t t, std::uint32_t s, std::uint32_t v,
                    std::uint32_t u) const {
    return ((std::size_t{t} * dims_.s + s) * dims_.v + v) * dims_.u + u;
  }

  std::uint16_t at(int plane, std::uint32_t t, std::uint32_t s,
                   std::uint32_t v, std::uint32_t u) const {
    return samples_[plane * dims_.count() + index(t, s, v, u)];
  }
  void set(int plane, std::uint32_t t, std::uint32_t s, std::uint32_t v,
           std::uint32_t u, std::uint16_t value) {
    samples_[plane * dims_.count() + index(t, s, v, u)] = value;
  }

  std::span<const std::uint16_t> plane(int p) const {
    return {samples_.data() + p * dims_.count(), dims_.count()};
  }
  std::span<std::uint16_t> plane(int p) {
    return {samples_.data() + p * dims_.count(), dims_.count()};
  }
  std::span<const std::uint16_t> samples() const { return samples_; }

  /// Throws if any sample exceeds max_sample().
  void validate() const;

  bool operator==(const LightField4D&) const = default;

 private:
  Dims4 dims_;
  int planes_ = 0;
  int bit_depth_ = 0;
  std::vector<std::uint16_t> samples_;
};

enum class NeighborRole : std::uint8_t { kLeft, kTopLeft, kTop, kTopRight };

struct CausalNeighbor {
  NeighborRole role;
  SaiCoord sai;
  bool operator==(const CausalNeighbor&) const = default;
};

/// Causal reference SAIs of `c` in raster SAI order, listed l, tl, t, tr.
/// Neighbours outside the angular grid are omitted.
std::vector<CausalNeighbor> causal_neighbors(SaiCoord c, const Dims4& dims);

/// Bits per pixel: sum of per-plane bit totals over T*S*V*U.
double bpp(std::span<const std::uint64_t> plane_bits, const Dims4& dims);

enum class Layout { kSaiGrid, kPlanarRaw };

/// Container ("LF4D") serialisation.
std::vector<std::uint8_t> serialize(const LightField4D& lf);
LightField4D parse(std::span<const std::uint8_t> bytes);

struct ContainerHeader {
  Dims4 dims;
  int planes = 0;
  int bit_depth = 0;
};
/// Reads only the fixed-size header; the payload may be absent.
ContainerHeader parse_header(std::span<const std::uint8_t> bytes);

/// kPlanarRaw reads/writes one container file; kSaiGrid reads/writes a
/// directory of binary PGM/PPM files named `<t>_<s>.pgm` / `.ppm`.
LightField4D load(const std::filesystem::path& path, Layout layout);
void store(const LightField4D& lf, const std::filesystem::path& path,
           Layout layout);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames, so a failure never leaves
/// a partial file behind.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes);

}  // namespace lfmrp

#endif  // LFMRP_LIGHTFIELD_HPP
