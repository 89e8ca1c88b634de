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

#include "lfmrp/codec.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <optional>

#include "lfmrp/bitio.hpp"
#include "lfmrp/error.hpp"
#include "lfmrp/side_info.hpp"

namespace lfmrp {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'M', 'R', '4', 'D'};
constexpr std::uint8_t kPackedBit = 0x80;

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = crc32(crc, bytes.data() + pos, static_cast<uInt>(n));
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::int32_t natural_alphabet(int plane, int bit_depth, bool rct) {
  return (rct && plane > 0) ? (std::int32_t{1} << (bit_depth + 1)) : (std::int32_t{1} << bit_depth);
}

int bits_for(std::int32_t alphabet) {
  return alphabet <= 1 ? 0 : std::bit_width(static_cast<std::uint32_t>(alphabet - 1));
}

struct Header {
  Dims4 dims;
  int planes = 0;
  int bit_depth = 0;
  Mode mode = Mode::kHex;
  bool rct = false;
  int current_support = 0;
  int reference_support = 0;
  TreeGeometry geometry;
};

void write_header(std::vector<std::uint8_t>& out, const Header& h) {
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_u8(out, kStreamVersion);
  put_u8(out, static_cast<std::uint8_t>(h.mode));
  put_varint(out, h.dims.t);
  put_varint(out, h.dims.s);
  put_varint(out, h.dims.v);
  put_varint(out, h.dims.u);
  put_u8(out, static_cast<std::uint32_t>(h.planes));
  put_u8(out, static_cast<std::uint32_t>(h.bit_depth));
  put_u8(out, h.rct ? 1 : 0);
  put_u8(out, static_cast<std::uint32_t>(h.current_support));
  put_u8(out, static_cast<std::uint32_t>(h.reference_support));
  put_u8(out, h.geometry.top_block);
  put_u8(out, h.geometry.min_spatial);
  put_u8(out, h.geometry.min_angular);
}

std::uint32_t dim_field(ByteReader& r) {
  const std::uint64_t x = r.varint();
  if (x == 0 || x > 0xFFFFFFFFu) fail(ErrorKind::kIntegrity, "invalid light-field dimension");
  return static_cast<std::uint32_t>(x);
}

/// Verifies magic, version and trailer checksum, then parses the header.
Header read_header(std::span<const std::uint8_t> stream, ByteReader& r) {
  if (stream.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), stream.begin()))
    fail(ErrorKind::kFormat, "not an MR4D bitstream (bad magic)");
  if (stream.size() < kMagic.size() + 1 + 8) fail(ErrorKind::kIntegrity, "truncated bitstream");
  const std::size_t body = stream.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= std::uint32_t{stream[body + i]} << (8 * i);
  if (crc32_of(stream.first(body)) != stored)
    fail(ErrorKind::kIntegrity, "bitstream checksum mismatch (corrupt or truncated)");
  r.take(kMagic.size());
  const std::uint8_t version = r.u8();
  if (version != kStreamVersion)
    fail(ErrorKind::kFormat, "unsupported bitstream version " + std::to_string(version));
  Header h;
  const std::uint8_t mode = r.u8();
  if (mode > 2) fail(ErrorKind::kIntegrity, "invalid mode byte");
  h.mode = static_cast<Mode>(mode);
  h.dims = {dim_field(r), dim_field(r), dim_field(r), dim_field(r)};
  h.planes = r.u8();
  h.bit_depth = r.u8();
  const std::uint8_t flags = r.u8();
  if ((h.planes != 1 && h.planes != 3) || h.bit_depth < 1 || h.bit_depth > 16 || flags > 1 ||
      (flags && h.planes != 3))
    fail(ErrorKind::kIntegrity, "invalid plane description");
  h.rct = flags & 1;
  h.current_support = r.u8();
  h.reference_support = r.u8();
  h.geometry.top_block = r.u8();
  h.geometry.min_spatial = r.u8();
  h.geometry.min_angular = r.u8();
  if (h.current_support > 64 || h.reference_support > 64)
    fail(ErrorKind::kIntegrity, "invalid support size");
  const auto top = h.geometry.top_block;
  if (top < 2 || top > 32 || !std::has_single_bit(top) || h.geometry.min_spatial == 0 ||
      h.geometry.min_angular == 0)
    fail(ErrorKind::kIntegrity, "invalid partition geometry");
  return h;
}

void write_pack_table(std::vector<std::uint8_t>& out, const PackTable& table) {
  put_varint(out, table.size());
  std::int32_t prev = -1;
  for (std::int32_t v : table.values()) {
    put_varint(out, static_cast<std::uint64_t>(v - prev - 1));
    prev = v;
  }
}

PackTable read_pack_table(ByteReader& r, std::int32_t natural) {
  const std::uint64_t k = r.varint();
  if (k < 2 || k > static_cast<std::uint64_t>(natural))
    fail(ErrorKind::kIntegrity, "invalid pack table size");
  std::vector<std::int32_t> values;
  values.reserve(k);
  std::int64_t prev = -1;
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint64_t gap = r.varint();
    if (gap >= static_cast<std::uint64_t>(natural))
      fail(ErrorKind::kIntegrity, "pack table value out of range");
    prev += static_cast<std::int64_t>(gap) + 1;
    if (prev >= natural) fail(ErrorKind::kIntegrity, "pack table value out of range");
    values.push_back(static_cast<std::int32_t>(prev));
  }
  return PackTable(std::move(values));
}

// --- MRP plane body ----------------------------------------------------------

/// Sequential residual pass shared by encoder and decoder. In decode mode
/// plane.samples is filled in place.
template <typename Code>
void residual_pass(Plane& plane, const std::vector<ClassModel>& classes,
                   const std::vector<std::int16_t>& cmap, const SupportShape& shape,
                   const GroupModelBank& bank, Code&& code) {
  const Predictor predictor(plane, shape);
  const Dims4& d = plane.dims;
  std::vector<std::int32_t> abs_error(plane.samples.size(), 0);
  std::vector<std::int32_t> taps(static_cast<std::size_t>(shape.total()));
  std::size_t p = 0;
  for (std::size_t sai = 0; sai < d.sai_count(); ++sai)
    for (std::uint32_t v = 0; v < d.v; ++v)
      for (std::uint32_t u = 0; u < d.u; ++u, ++p) {
        const int m = cmap[p];
        const ClassModel& model = classes[static_cast<std::size_t>(m)];
        predictor.gather(sai, v, u, taps);
        const std::int32_t pred = predictor.predict(taps, model.coefficients);
        const int group = quantise_context(predictor.context(sai, v, u, abs_error), model);
        const int sh = model.shapes[static_cast<std::size_t>(group)];
        const std::int32_t sample = code(p, m, group, sh, pred, bank.at(group, sh));
        abs_error[p] = std::abs(sample - pred);
      }
}

void write_side_section(BitWriter& w, const PlaneSolution& sol, Mode mode) {
  for (const auto& c : sol.classes) {
    for (auto a : c.coefficients) w.put_se(a);
    int prev = 0;
    for (auto t : c.thresholds) {
      w.put_ue(static_cast<std::uint64_t>(t - prev));
      prev = t;
    }
    for (auto s : c.shapes) w.put(s, 3);
  }
  if (mode == Mode::kDual) {
    w.put(sol.flags.none, 3);
    w.put(sol.flags.spatial, 3);
  } else {
    for (auto i : sol.flags.binary) w.put(i, 3);
  }
}

PlaneSolution read_side_section(BitReader& r, int classes, int taps, Mode mode) {
  PlaneSolution sol;
  sol.classes.resize(static_cast<std::size_t>(classes));
  for (auto& c : sol.classes) {
    c.coefficients.resize(static_cast<std::size_t>(taps));
    for (auto& a : c.coefficients) {
      const std::int64_t x = r.get_se();
      if (x < kCoefMin || x > kCoefMax) fail(ErrorKind::kIntegrity, "coefficient out of range");
      a = static_cast<std::int32_t>(x);
    }
    std::uint64_t acc = 0;
    for (auto& t : c.thresholds) {
      acc += r.get_ue();
      if (acc >= kThresholdGrid) fail(ErrorKind::kIntegrity, "threshold out of range");
      t = static_cast<std::uint8_t>(acc);
    }
    for (auto& s : c.shapes) {
      s = static_cast<std::uint8_t>(r.get(3));
      if (s >= kShapeCount) fail(ErrorKind::kIntegrity, "invalid shape index");
    }
  }
  auto menu = [&] {
    const auto i = static_cast<std::uint8_t>(r.get(3));
    if (i >= kFlagMenu.size()) fail(ErrorKind::kIntegrity, "invalid flag menu index");
    return i;
  };
  if (mode == Mode::kDual) {
    sol.flags.none = menu();
    sol.flags.spatial = menu();
  } else {
    for (auto& i : sol.flags.binary) i = menu();
  }
  return sol;
}

std::string extent_name(const Block4D& b) {
  return std::to_string(b.extent[0]) + "x" + std::to_string(b.extent[1]) + "x" +
         std::to_string(b.extent[2]) + "x" + std::to_string(b.extent[3]);
}

void tree_stats(const std::vector<PartitionTree>& forest, PlaneReport& report) {
  for (const auto& tree : forest) {
    for (std::size_t i = 0; i < tree.size(); ++i) {
      const auto& n = tree.node(static_cast<std::int32_t>(i));
      ++report.node_kinds[static_cast<std::size_t>(n.kind)];
      if (n.kind == NodeKind::kLeaf) ++report.leaf_sizes[extent_name(n.block)];
    }
  }
}

std::vector<std::uint8_t> mrp_section(Plane& work, const EncoderConfig& config,
                                      std::uint8_t kind_byte, const PackTable* table,
                                      PlaneReport& report, int plane_index, const TraceFn& trace) {
  const OptimiserResult opt = run_encoder_loops(work, config);
  const PlaneSolution& sol = opt.solution;
  const SupportShape shape(config.current_support, config.reference_support);
  const PartitionSpace space(config.mode, work.dims, config.geometry);
  const GroupModelBank bank(work.alphabet);
  const int classes = static_cast<int>(sol.classes.size());

  std::vector<std::uint8_t> out;
  put_u8(out, kind_byte);
  if (table) write_pack_table(out, *table);
  put_u8(out, static_cast<std::uint32_t>(classes));
  BitWriter side;
  write_side_section(side, sol, config.mode);
  put_varint(out, side.bytes().size());
  out.insert(out.end(), side.bytes().begin(), side.bytes().end());

  RangeEncoder enc;
  encode_side_info(enc, sol.forest, space, sol.flags, classes);
  const auto cmap = class_map(sol.forest, space);
  residual_pass(work, sol.classes, cmap, shape, bank,
                [&](std::size_t p, int m, int g, int sh, std::int32_t pred, const GroupModel& gm) {
                  const std::int32_t s = work.samples[p];
                  const std::uint32_t sym = fold_residual(s, pred, work.alphabet);
                  gm.encode(enc, sym);
                  if (trace) trace({plane_index, p, m, g, sh, pred, sym});
                  return s;
                });
  const auto body = enc.finish();
  put_varint(out, body.size());
  out.insert(out.end(), body.begin(), body.end());

  report.classes = classes;
  report.body_bits = 8.0 * static_cast<double>(body.size());
  report.estimate = opt.cost;
  report.loop1 = opt.loop1;
  report.loop2 = opt.loop2;
  report.removed_classes = opt.removed_classes;
  tree_stats(sol.forest, report);
  return out;
}

std::vector<std::uint8_t> raw_section(const Plane& work, std::uint8_t kind_byte,
                                      const PackTable* table) {
  std::vector<std::uint8_t> out;
  put_u8(out, kind_byte);
  if (table) write_pack_table(out, *table);
  BitWriter w;
  const int bits = bits_for(work.alphabet);
  for (std::int32_t s : work.samples) w.put(static_cast<std::uint64_t>(s), bits);
  out.insert(out.end(), w.bytes().begin(), w.bytes().end());
  return out;
}

std::vector<std::uint8_t> encode_plane(const Plane& plane, const EncoderConfig& config,
                                       PlaneReport& report, int plane_index,
                                       const TraceFn& trace) {
  const auto [lo, hi] = std::minmax_element(plane.samples.begin(), plane.samples.end());
  report.alphabet = plane.alphabet;
  if (*lo == *hi) {
    std::vector<std::uint8_t> out;
    put_u8(out, static_cast<std::uint32_t>(PlaneKind::kFlat));
    put_varint(out, static_cast<std::uint64_t>(*lo));
    report.kind = PlaneKind::kFlat;
    return out;
  }
  Plane work = plane;
  std::optional<PackTable> table;
  if (should_pack(plane.samples, plane.dims.sai_size())) {
    auto [packed, t] = pack_histogram(plane.samples);
    work.samples = std::move(packed);
    work.alphabet = static_cast<std::int32_t>(t.size());
    table = std::move(t);
  }
  report.packed = table.has_value();
  report.alphabet = work.alphabet;
  const std::uint8_t pack_bit = table ? kPackedBit : 0;
  const PackTable* tp = table ? &*table : nullptr;

  std::vector<TraceEvent> events;
  TraceFn collect;
  if (trace) collect = [&](const TraceEvent& e) { events.push_back(e); };
  auto mrp = mrp_section(work, config,
                         static_cast<std::uint8_t>(static_cast<std::uint8_t>(PlaneKind::kMrp) | pack_bit),
                         tp, report, plane_index, collect);
  if (config.raw_fallback) {
    auto raw = raw_section(work, static_cast<std::uint8_t>(static_cast<std::uint8_t>(PlaneKind::kRaw) | pack_bit), tp);
    // A pack table can cost more than it saves on dense noise.
    if (table) {
      auto plain = raw_section(plane, static_cast<std::uint8_t>(PlaneKind::kRaw), nullptr);
      if (plain.size() <= raw.size()) {
        raw = std::move(plain);
        report.packed = false;
        report.alphabet = plane.alphabet;
      }
    }
    if (raw.size() < mrp.size()) {
      report.kind = PlaneKind::kRaw;
      report.classes = 0;
      return raw;
    }
    report.packed = table.has_value();
    report.alphabet = work.alphabet;
  }
  report.kind = PlaneKind::kMrp;
  if (trace)
    for (const auto& e : events) trace(e);
  return mrp;
}

struct SectionView {
  PlaneKind kind;
  bool packed;
  std::int32_t alphabet;
  int classes = 0;
};

/// Decodes (or, with `plane` null, skips) one plane section.
SectionView read_plane(ByteReader& r, const Header& h, int index, Plane* plane,
                       const TraceFn& trace) {
  const std::uint8_t kind_byte = r.u8();
  SectionView view{static_cast<PlaneKind>(kind_byte & 0x7f), (kind_byte & kPackedBit) != 0, 0};
  const std::int32_t natural = natural_alphabet(index, h.bit_depth, h.rct);
  const std::size_t n = h.dims.count();
  if ((kind_byte & 0x7f) > 2 || (view.kind == PlaneKind::kFlat && view.packed))
    fail(ErrorKind::kIntegrity, "invalid plane kind");
  if (view.kind == PlaneKind::kFlat) {
    const std::uint64_t value = r.varint();
    if (value >= static_cast<std::uint64_t>(natural)) fail(ErrorKind::kIntegrity, "flat value out of range");
    view.alphabet = natural;
    if (plane) plane->samples.assign(n, static_cast<std::int32_t>(value));
    return view;
  }
  std::optional<PackTable> table;
  if (view.packed) table = read_pack_table(r, natural);
  view.alphabet = table ? static_cast<std::int32_t>(table->size()) : natural;

  Plane work{h.dims, view.alphabet, {}};
  if (view.kind == PlaneKind::kRaw) {
    const int bits = bits_for(view.alphabet);
    const auto bytes = r.take((n * static_cast<std::size_t>(bits) + 7) / 8);
    if (plane) {
      BitReader br(bytes);
      work.samples.resize(n);
      for (auto& s : work.samples) {
        s = static_cast<std::int32_t>(br.get(bits));
        if (s >= view.alphabet) fail(ErrorKind::kIntegrity, "raw sample out of range");
      }
    }
  } else {
    view.classes = r.u8();
    if (view.classes < 1) fail(ErrorKind::kIntegrity, "MRP plane without classes");
    const auto side = r.take(r.varint());
    const auto body = r.take(r.varint());
    if (plane) {
      const SupportShape shape(h.current_support, h.reference_support);
      BitReader br(side);
      const PlaneSolution sol = read_side_section(br, view.classes, shape.total(), h.mode);
      const PartitionSpace space(h.mode, h.dims, h.geometry);
      RangeDecoder dec(body);
      const auto forest = decode_side_info(dec, space, sol.flags, view.classes);
      const auto cmap = class_map(forest, space);
      const GroupModelBank bank(view.alphabet);
      work.samples.assign(n, 0);
      residual_pass(work, sol.classes, cmap, shape, bank,
                    [&](std::size_t p, int m, int g, int sh, std::int32_t pred,
                        const GroupModel& gm) {
                      const std::uint32_t sym = gm.decode(dec);
                      if (sym >= static_cast<std::uint32_t>(view.alphabet))
                        fail(ErrorKind::kIntegrity, "decoded residual outside the alphabet");
                      const std::int32_t s = unfold_residual(sym, pred, view.alphabet);
                      work.samples[p] = s;
                      if (trace) trace({index, p, m, g, sh, pred, sym});
                      return s;
                    });
    }
  }
  if (plane) {
    plane->samples = table ? unpack_histogram(work.samples, *table) : std::move(work.samples);
  }
  return view;
}

}  // namespace

std::string to_string(PlaneKind kind) {
  switch (kind) {
    case PlaneKind::kFlat: return "flat";
    case PlaneKind::kRaw: return "raw";
    case PlaneKind::kMrp: return "mrp";
  }
  return "?";
}

std::vector<Plane> to_coding_planes(const LightField4D& lf, bool rct) {
  const std::size_t n = lf.dims().count();
  std::vector<Plane> planes(static_cast<std::size_t>(lf.planes()));
  for (int p = 0; p < lf.planes(); ++p) {
    planes[p].dims = lf.dims();
    planes[p].alphabet = natural_alphabet(p, lf.bit_depth(), rct && lf.planes() == 3);
    planes[p].samples.resize(n);
  }
  if (rct && lf.planes() == 3) {
    const std::int32_t offset = std::int32_t{1} << lf.bit_depth();
    const auto r = lf.plane(0), g = lf.plane(1), b = lf.plane(2);
    for (std::size_t i = 0; i < n; ++i) {
      const Ycc y = rct_forward(r[i], g[i], b[i]);
      planes[0].samples[i] = y.y;
      planes[1].samples[i] = y.cu + offset;
      planes[2].samples[i] = y.cv + offset;
    }
  } else {
    for (int p = 0; p < lf.planes(); ++p) {
      const auto src = lf.plane(p);
      std::copy(src.begin(), src.end(), planes[p].samples.begin());
    }
  }
  return planes;
}

LightField4D from_coding_planes(const std::vector<Plane>& planes, int bit_depth, bool rct) {
  if (planes.empty()) fail(ErrorKind::kArgument, "no planes");
  LightField4D lf(planes[0].dims, static_cast<int>(planes.size()), bit_depth);
  const std::size_t n = lf.dims().count();
  const std::int32_t max = (std::int32_t{1} << bit_depth) - 1;
  auto put = [&](int p, std::size_t i, std::int32_t v) {
    if (v < 0 || v > max) fail(ErrorKind::kIntegrity, "reconstructed sample out of range");
    lf.plane(p)[i] = static_cast<std::uint16_t>(v);
  };
  if (rct && planes.size() == 3) {
    const std::int32_t offset = std::int32_t{1} << bit_depth;
    for (std::size_t i = 0; i < n; ++i) {
      const Rgb c = rct_inverse(planes[0].samples[i], planes[1].samples[i] - offset,
                                planes[2].samples[i] - offset);
      put(0, i, c.r);
      put(1, i, c.g);
      put(2, i, c.b);
    }
  } else {
    for (std::size_t p = 0; p < planes.size(); ++p)
      for (std::size_t i = 0; i < n; ++i) put(static_cast<int>(p), i, planes[p].samples[i]);
  }
  return lf;
}

std::uint32_t sample_checksum(const LightField4D& lf) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(lf.samples().size() * 2);
  for (auto s : lf.samples()) {
    bytes.push_back(static_cast<std::uint8_t>(s));
    bytes.push_back(static_cast<std::uint8_t>(s >> 8));
  }
  return crc32_of(bytes);
}

EncoderConfig intra_only(EncoderConfig config) {
  config.mode = Mode::kQuad2d;
  config.reference_support = 0;
  return config;
}

std::vector<std::uint8_t> encode_lightfield(const LightField4D& lf, const EncoderConfig& config,
                                            EncodeReport* report, const TraceFn& trace) {
  lf.validate();
  if (config.current_support > 64 || config.reference_support > 64 ||
      config.geometry.min_spatial > 255 || config.geometry.min_angular > 255)
    fail(ErrorKind::kArgument, "configuration value exceeds the bitstream field range");
  // Validates the geometry before any work is done.
  (void)PartitionSpace(config.mode, lf.dims(), config.geometry);

  Header h;
  h.dims = lf.dims();
  h.planes = lf.planes();
  h.bit_depth = lf.bit_depth();
  h.mode = config.mode;
  h.rct = lf.planes() == 3;
  h.current_support = config.current_support;
  h.reference_support = config.reference_support;
  h.geometry = config.geometry;

  std::vector<std::uint8_t> out;
  write_header(out, h);
  const auto planes = to_coding_planes(lf, h.rct);
  EncodeReport local;
  for (int p = 0; p < lf.planes(); ++p) {
    PlaneReport pr;
    const auto section = encode_plane(planes[p], config, pr, p, trace);
    pr.bytes = section.size();
    pr.bpp = 8.0 * static_cast<double>(section.size()) / static_cast<double>(lf.dims().count());
    out.insert(out.end(), section.begin(), section.end());
    local.plane_reports.push_back(std::move(pr));
  }
  put_u32(out, sample_checksum(lf));
  put_u32(out, crc32_of(out));

  if (report) {
    local.dims = lf.dims();
    local.planes = lf.planes();
    local.bit_depth = lf.bit_depth();
    local.mode = config.mode;
    local.rct = h.rct;
    local.bytes = out.size();
    local.bpp = 8.0 * static_cast<double>(out.size()) / static_cast<double>(lf.dims().count());
    *report = std::move(local);
  }
  return out;
}

LightField4D decode_lightfield(std::span<const std::uint8_t> stream, const TraceFn& trace) {
  ByteReader r(stream.first(stream.size() >= 4 ? stream.size() - 4 : 0));
  const Header h = read_header(stream, r);
  // Constructing the container validates the total sample count.
  (void)LightField4D(h.dims, h.planes, h.bit_depth);
  std::vector<Plane> planes(static_cast<std::size_t>(h.planes));
  for (int p = 0; p < h.planes; ++p) {
    planes[p].dims = h.dims;
    read_plane(r, h, p, &planes[p], trace);
  }
  const std::uint32_t expected = r.u32();
  if (r.remaining() != 0) fail(ErrorKind::kIntegrity, "trailing bytes after the planes");
  LightField4D lf = from_coding_planes(planes, h.bit_depth, h.rct);
  if (sample_checksum(lf) != expected)
    fail(ErrorKind::kIntegrity, "decoded sample checksum mismatch");
  return lf;
}

StreamInfo inspect_stream(std::span<const std::uint8_t> stream) {
  ByteReader r(stream.first(stream.size() >= 4 ? stream.size() - 4 : 0));
  const Header h = read_header(stream, r);
  StreamInfo info;
  info.dims = h.dims;
  info.planes = h.planes;
  info.bit_depth = h.bit_depth;
  info.mode = h.mode;
  info.rct = h.rct;
  info.current_support = h.current_support;
  info.reference_support = h.reference_support;
  info.geometry = h.geometry;
  info.bytes = stream.size();
  for (int p = 0; p < h.planes; ++p) {
    const std::size_t start = r.position();
    const SectionView v = read_plane(r, h, p, nullptr, {});
    PlaneReport pr;
    pr.kind = v.kind;
    pr.packed = v.packed;
    pr.alphabet = v.alphabet;
    pr.classes = v.classes;
    pr.bytes = r.position() - start;
    pr.bpp = 8.0 * static_cast<double>(pr.bytes) / static_cast<double>(h.dims.count());
    info.plane_reports.push_back(std::move(pr));
  }
  r.u32();
  if (r.remaining() != 0) fail(ErrorKind::kIntegrity, "trailing bytes after the planes");
  return info;
}

}  // namespace lfmrp
