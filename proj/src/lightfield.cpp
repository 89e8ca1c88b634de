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

#include "lfmrp/lightfield.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <string>

#include "lfmrp/error.hpp"

namespace lfmrp {

namespace fs = std::filesystem;

namespace {

constexpr char kContainerMagic[4] = {'L', 'F', '4', 'D'};
constexpr std::uint8_t kContainerVersion = 1;
constexpr std::size_t kContainerHeader = 4 + 1 + 16 + 1 + 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 |
         std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
}

void check_shape(const Dims4& dims, int planes, int bit_depth) {
  if (planes != 1 && planes != 3)
    fail(ErrorKind::kFormat, "plane count must be 1 or 3");
  if (bit_depth < 1 || bit_depth > 16)
    fail(ErrorKind::kFormat, "bit depth must be in [1, 16]");
  if (dims.count() == 0) fail(ErrorKind::kFormat, "light field has zero size");
  if (dims.count() > (std::size_t{1} << 34))
    fail(ErrorKind::kFormat, "light field too large");
}

// Binary PGM (P5) / PPM (P6) reader.
struct Pnm {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int channels = 0;
  std::uint32_t maxval = 0;
  std::vector<std::uint16_t> data;  // interleaved
};

Pnm parse_pnm(std::span<const std::uint8_t> bytes, const fs::path& name) {
  std::size_t pos = 0;
  auto bad = [&](const char* what) {
    fail(ErrorKind::kFormat, name.string() + ": " + what);
  };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&] {
    skip_space();
    std::uint32_t x = 0;
    const char* first = reinterpret_cast<const char*>(bytes.data() + pos);
    const char* last = reinterpret_cast<const char*>(bytes.data() + bytes.size());
    auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || ptr == first) bad("malformed PNM header");
    pos += static_cast<std::size_t>(ptr - first);
    return x;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    bad("not a binary PGM/PPM file");
  Pnm img;
  img.channels = bytes[1] == '5' ? 1 : 3;
  pos = 2;
  img.width = number();
  img.height = number();
  img.maxval = number();
  if (img.width == 0 || img.height == 0 || img.maxval == 0 || img.maxval > 65535)
    bad("unsupported PNM dimensions or maxval");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) bad("malformed PNM header");
  ++pos;
  const std::size_t n = std::size_t{img.width} * img.height * img.channels;
  const std::size_t bps = img.maxval > 255 ? 2 : 1;
  if (bytes.size() - pos < n * bps) bad("truncated PNM payload");
  img.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t x = bps == 2 ? (std::uint32_t{bytes[pos + 2 * i]} << 8) | bytes[pos + 2 * i + 1]
                               : bytes[pos + i];
    if (x > img.maxval) bad("sample exceeds maxval");
    img.data[i] = static_cast<std::uint16_t>(x);
  }
  return img;
}

bool parse_sai_name(const fs::path& p, std::uint32_t& t, std::uint32_t& s) {
  const std::string ext = p.extension().string();
  if (ext != ".pgm" && ext != ".ppm") return false;
  const std::string stem = p.stem().string();
  const auto sep = stem.find('_');
  if (sep == std::string::npos) return false;
  auto parse = [](std::string_view sv, std::uint32_t& out) {
    auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), out);
    return ec == std::errc() && ptr == sv.data() + sv.size() && !sv.empty();
  };
  return parse(std::string_view(stem).substr(0, sep), t) &&
         parse(std::string_view(stem).substr(sep + 1), s);
}

LightField4D load_sai_grid(const fs::path& dir) {
  if (!fs::is_directory(dir))
    fail(ErrorKind::kFormat, dir.string() + ": not a directory");
  std::map<std::pair<std::uint32_t, std::uint32_t>, fs::path> files;
  std::uint32_t max_t = 0, max_s = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::uint32_t t = 0, s = 0;
    if (!entry.is_regular_file() || !parse_sai_name(entry.path(), t, s)) continue;
    files[{t, s}] = entry.path();
    max_t = std::max(max_t, t);
    max_s = std::max(max_s, s);
  }
  if (files.empty()) fail(ErrorKind::kFormat, dir.string() + ": no SAI files");
  const Dims4 grid{max_t + 1, max_s + 1, 0, 0};
  if (files.size() != grid.sai_count())
    fail(ErrorKind::kFormat, dir.string() + ": SAI grid has gaps");

  LightField4D lf;
  for (const auto& [ts, path] : files) {
    const auto bytes = read_file(path);
    const Pnm img = parse_pnm(bytes, path);
    if (lf.planes() == 0) {
      const Dims4 dims{grid.t, grid.s, img.height, img.width};
      lf = LightField4D(dims, img.channels, std::bit_width(img.maxval));
    } else if (img.width != lf.dims().u || img.height != lf.dims().v ||
               img.channels != lf.planes() ||
               static_cast<int>(std::bit_width(img.maxval)) != lf.bit_depth()) {
      fail(ErrorKind::kFormat, path.string() + ": inconsistent SAI geometry");
    }
    const auto [t, s] = ts;
    std::size_t i = 0;
    for (std::uint32_t v = 0; v < img.height; ++v)
      for (std::uint32_t u = 0; u < img.width; ++u)
        for (int c = 0; c < img.channels; ++c) lf.set(c, t, s, v, u, img.data[i++]);
  }
  return lf;
}

void store_sai_grid(const LightField4D& lf, const fs::path& dir) {
  fs::create_directories(dir);
  const Dims4& d = lf.dims();
  const bool wide = lf.max_sample() > 255;
  for (std::uint32_t t = 0; t < d.t; ++t) {
    for (std::uint32_t s = 0; s < d.s; ++s) {
      const std::string header = std::string(lf.planes() == 1 ? "P5" : "P6") + "\n" +
                                 std::to_string(d.u) + " " + std::to_string(d.v) +
                                 "\n" + std::to_string(lf.max_sample()) + "\n";
      std::vector<std::uint8_t> out(header.begin(), header.end());
      for (std::uint32_t v = 0; v < d.v; ++v)
        for (std::uint32_t u = 0; u < d.u; ++u)
          for (int c = 0; c < lf.planes(); ++c) {
            const std::uint16_t x = lf.at(c, t, s, v, u);
            if (wide) out.push_back(static_cast<std::uint8_t>(x >> 8));
            out.push_back(static_cast<std::uint8_t>(x & 0xff));
          }
      char name[64];
      std::snprintf(name, sizeof name, "%03u_%03u.%s", t, s, lf.planes() == 1 ? "pgm" : "ppm");
      write_file_atomic(dir / name, out);
    }
  }
}

}  // namespace

LightField4D::LightField4D(Dims4 dims, int planes, int bit_depth)
    : dims_(dims), planes_(planes), bit_depth_(bit_depth) {
  check_shape(dims, planes, bit_depth);
  samples_.assign(dims.count() * static_cast<std::size_t>(planes), 0);
}

void LightField4D::validate() const {
  const auto limit = max_sample();
  if (std::any_of(samples_.begin(), samples_.end(),
                  [limit](std::uint16_t x) { return x > limit; }))
    fail(ErrorKind::kFormat, "sample exceeds declared bit depth");
}

std::vector<CausalNeighbor> causal_neighbors(SaiCoord c, const Dims4& dims) {
  std::vector<CausalNeighbor> out;
  if (c.s > 0) out.push_back({NeighborRole::kLeft, {c.t, c.s - 1}});
  if (c.t > 0) {
    if (c.s > 0) out.push_back({NeighborRole::kTopLeft, {c.t - 1, c.s - 1}});
    out.push_back({NeighborRole::kTop, {c.t - 1, c.s}});
    if (c.s + 1 < dims.s) out.push_back({NeighborRole::kTopRight, {c.t - 1, c.s + 1}});
  }
  return out;
}

double bpp(std::span<const std::uint64_t> plane_bits, const Dims4& dims) {
  if (dims.count() == 0) fail(ErrorKind::kArgument, "bpp of a zero-sized light field");
  std::uint64_t total = 0;
  for (auto b : plane_bits) total += b;
  return static_cast<double>(total) / static_cast<double>(dims.count());
}

std::vector<std::uint8_t> serialize(const LightField4D& lf) {
  std::vector<std::uint8_t> out(std::begin(kContainerMagic), std::end(kContainerMagic));
  out.push_back(kContainerVersion);
  const Dims4& d = lf.dims();
  put_u32(out, d.t);
  put_u32(out, d.s);
  put_u32(out, d.v);
  put_u32(out, d.u);
  out.push_back(static_cast<std::uint8_t>(lf.planes()));
  out.push_back(static_cast<std::uint8_t>(lf.bit_depth()));
  out.reserve(out.size() + lf.samples().size() * 2);
  for (std::uint16_t x : lf.samples()) {
    out.push_back(static_cast<std::uint8_t>(x & 0xff));
    out.push_back(static_cast<std::uint8_t>(x >> 8));
  }
  return out;
}

ContainerHeader parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kContainerHeader ||
      std::memcmp(bytes.data(), kContainerMagic, 4) != 0)
    fail(ErrorKind::kFormat, "not an LF4D container");
  if (bytes[4] != kContainerVersion)
    fail(ErrorKind::kFormat, "unsupported LF4D version " + std::to_string(bytes[4]));
  ContainerHeader h{{get_u32(&bytes[5]), get_u32(&bytes[9]), get_u32(&bytes[13]),
                     get_u32(&bytes[17])},
                    bytes[21],
                    bytes[22]};
  check_shape(h.dims, h.planes, h.bit_depth);
  return h;
}

LightField4D parse(std::span<const std::uint8_t> bytes) {
  const auto [dims, planes, depth] = parse_header(bytes);
  const std::size_t n = dims.count() * static_cast<std::size_t>(planes);
  const std::size_t payload = bytes.size() - kContainerHeader;
  if (payload < 2 * n) fail(ErrorKind::kFormat, "truncated LF4D payload");
  if (payload > 2 * n) fail(ErrorKind::kFormat, "trailing bytes after LF4D payload");

  LightField4D lf(dims, planes, depth);
  const std::uint8_t* p = bytes.data() + kContainerHeader;
  for (int c = 0; c < planes; ++c) {
    auto dst = lf.plane(c);
    for (std::size_t i = 0; i < dst.size(); ++i, p += 2)
      dst[i] = static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  lf.validate();
  return lf;
}

LightField4D load(const fs::path& path, Layout layout) {
  if (layout == Layout::kSaiGrid) return load_sai_grid(path);
  return parse(read_file(path));
}

void store(const LightField4D& lf, const fs::path& path, Layout layout) {
  if (layout == Layout::kSaiGrid) {
    store_sai_grid(lf, path);
    return;
  }
  write_file_atomic(path, serialize(lf));
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kArgument, path.string() + ": cannot open");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kArgument, tmp.string() + ": cannot create");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      fs::remove(tmp);
      fail(ErrorKind::kArgument, tmp.string() + ": write failed");
    }
  }
  fs::rename(tmp, path);
}

}  // namespace lfmrp
