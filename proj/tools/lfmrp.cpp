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

// lfmrp command line: encode, decode, inspect, compare, synth, convert.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lfmrp/codec.hpp"
#include "lfmrp/error.hpp"
#include "lfmrp/lightfield.hpp"
#include "lfmrp/synth.hpp"

namespace fs = std::filesystem;
using namespace lfmrp;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kArgument: return kExitUsage;
    case ErrorKind::kFormat:
    case ErrorKind::kIntegrity: return kExitData;
  }
  return kExitFailure;
}

Layout input_layout(const fs::path& p) {
  return fs::is_directory(p) ? Layout::kSaiGrid : Layout::kPlanarRaw;
}

void require_input(const fs::path& p) {
  if (!fs::exists(p)) fail(ErrorKind::kArgument, "no such input: " + p.string());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void print_kv(const std::vector<std::pair<std::string, std::string>>& fields) {
  for (const auto& [k, v] : fields) std::cout << "#kv " << k << '=' << v << '\n';
}

void print_encode_summary(const EncodeReport& r, double secs) {
  std::printf("%ux%ux%ux%u, %d plane(s), %d bit, mode %s%s\n", r.dims.t, r.dims.s, r.dims.v,
              r.dims.u, r.planes, r.bit_depth, to_string(r.mode).c_str(), r.rct ? ", rct" : "");
  for (std::size_t i = 0; i < r.plane_reports.size(); ++i) {
    const auto& p = r.plane_reports[i];
    std::printf("  plane %zu: %-4s %8zu bytes  %.4f bpp", i, to_string(p.kind).c_str(), p.bytes,
                p.bpp);
    if (p.classes > 0)
      std::printf("  M=%d  J=%.0f (a %.0f, m %.0f, t %.0f, r %.0f)  iters %d+%d", p.classes,
                  p.estimate.total(), p.estimate.coefficients, p.estimate.side(),
                  p.estimate.thresholds, p.estimate.residuals, p.loop1.iterations,
                  p.loop2.iterations);
    std::printf("\n");
  }
  std::printf("total %zu bytes, %.4f bpp, %.2f s\n", r.bytes, r.bpp, secs);
}

struct EncodeOptions {
  std::string mode;
  std::string config;
  std::vector<std::string> sets;
  int jobs = 0;
};

EncoderConfig build_config(const EncodeOptions& o) {
  EncoderConfig c;
  if (!o.config.empty()) c = load_config(o.config, c);
  if (!o.mode.empty()) c.mode = parse_mode(o.mode);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorKind::kArgument, "expected key=value: " + kv);
    apply_config_entry(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.jobs > 0) c.jobs = o.jobs;
  return c;
}

void add_encode_options(CLI::App* cmd, EncodeOptions& o) {
  cmd->add_option("--mode", o.mode, "partition mode: 4d, dt or 2d");
  cmd->add_option("--config", o.config, "key=value configuration file");
  cmd->add_option("--set", o.sets, "override one configuration entry (key=value)");
  cmd->add_option("--jobs", o.jobs, "worker threads");
}

std::vector<std::uint32_t> parse_dims(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find_first_of(",x", pos);
    const auto part = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      out.push_back(static_cast<std::uint32_t>(std::stoul(part)));
    } catch (const std::exception&) {
      fail(ErrorKind::kArgument, "bad dims: " + text);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.size() != 4) fail(ErrorKind::kArgument, "dims need four values T,S,V,U: " + text);
  return out;
}

// --- compare ---------------------------------------------------------------

struct Cell {
  std::string input, mode;
  bool ok = false;
  double bpp = 0;
  std::size_t bytes = 0;
  double seconds = 0;
  std::string error;
};

Cell run_cell(const fs::path& input, const std::string& label, const EncoderConfig& config) {
  Cell cell;
  cell.input = input.string();
  cell.mode = label;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    require_input(input);
    const auto lf = load(input, input_layout(input));
    EncodeReport report;
    const auto stream = encode_lightfield(lf, config, &report);
    if (!(decode_lightfield(stream) == lf)) fail(ErrorKind::kIntegrity, "roundtrip mismatch");
    cell.ok = true;
    cell.bpp = report.bpp;
    cell.bytes = report.bytes;
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  cell.seconds = seconds_since(t0);
  return cell;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lossless 4D light-field coder"};
  app.require_subcommand(1);

  EncodeOptions enc;
  std::string enc_in, enc_out;
  auto* encode = app.add_subcommand("encode", "compress a light field");
  encode->add_option("input", enc_in, "LF4D container or SAI-grid directory")->required();
  encode->add_option("output", enc_out, "bitstream path")->required();
  add_encode_options(encode, enc);

  std::string dec_in, dec_out, dec_layout = "container";
  auto* decode = app.add_subcommand("decode", "decompress a bitstream");
  decode->add_option("input", dec_in)->required();
  decode->add_option("output", dec_out)->required();
  decode->add_option("--layout", dec_layout, "container or sai-grid")
      ->check(CLI::IsMember({"container", "sai-grid"}));

  std::string ins_in;
  auto* inspect = app.add_subcommand("inspect", "print bitstream header and sections");
  inspect->add_option("input", ins_in)->required();

  EncodeOptions cmp;
  std::vector<std::string> cmp_in;
  std::string cmp_modes = "4d,dt,2d", cmp_csv;
  bool cmp_intra = false;
  auto* compare = app.add_subcommand("compare", "encode inputs under several modes");
  compare->add_option("inputs", cmp_in)->required();
  compare->add_option("--modes", cmp_modes, "comma separated modes");
  compare->add_flag("--intra", cmp_intra, "add the intra-only baseline");
  compare->add_option("--csv", cmp_csv, "write the table as CSV");
  add_encode_options(compare, cmp);

  std::string syn_out, syn_kind = "shifted", syn_dims = "5,5,64,64", syn_layout = "container";
  int syn_planes = 1, syn_bd = 8, syn_disp = 1;
  std::uint64_t syn_seed = 1;
  std::uint32_t syn_value = 0;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic light field");
  synth_cmd->add_option("output", syn_out)->required();
  synth_cmd->add_option("--kind", syn_kind)->check(CLI::IsMember({"constant", "noise", "shifted"}));
  synth_cmd->add_option("--dims", syn_dims, "T,S,V,U");
  synth_cmd->add_option("--planes", syn_planes)->check(CLI::IsMember({1, 3}));
  synth_cmd->add_option("--bit-depth", syn_bd)->check(CLI::Range(1, 16));
  synth_cmd->add_option("--seed", syn_seed);
  synth_cmd->add_option("--disparity", syn_disp);
  synth_cmd->add_option("--value", syn_value);
  synth_cmd->add_option("--layout", syn_layout)->check(CLI::IsMember({"container", "sai-grid"}));

  std::string cvt_in, cvt_out, cvt_layout = "container";
  auto* convert = app.add_subcommand("convert", "convert between container and SAI grid");
  convert->add_option("input", cvt_in)->required();
  convert->add_option("output", cvt_out)->required();
  convert->add_option("--layout", cvt_layout, "output layout")
      ->check(CLI::IsMember({"container", "sai-grid"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  auto layout_of = [](const std::string& s) {
    return s == "sai-grid" ? Layout::kSaiGrid : Layout::kPlanarRaw;
  };

  try {
    if (*encode) {
      require_input(enc_in);
      const auto config = build_config(enc);
      const auto t0 = std::chrono::steady_clock::now();
      const auto lf = load(enc_in, input_layout(enc_in));
      EncodeReport report;
      const auto stream = encode_lightfield(lf, config, &report);
      write_file_atomic(enc_out, stream);
      const double secs = seconds_since(t0);
      print_encode_summary(report, secs);
      print_kv(report_fields(report));
      std::printf("#kv seconds=%.3f\n", secs);
    } else if (*decode) {
      require_input(dec_in);
      const auto t0 = std::chrono::steady_clock::now();
      const auto lf = decode_lightfield(read_file(dec_in));
      store(lf, dec_out, layout_of(dec_layout));
      std::printf("decoded %ux%ux%ux%u, %d plane(s), %.2f s\n", lf.dims().t, lf.dims().s,
                  lf.dims().v, lf.dims().u, lf.planes(), seconds_since(t0));
      std::printf("#kv crc32=%08x\n", sample_checksum(lf));
    } else if (*inspect) {
      require_input(ins_in);
      const auto info = inspect_stream(read_file(ins_in));
      for (const auto& [k, v] : report_fields(info)) std::cout << k << ": " << v << '\n';
      print_kv(report_fields(info));
    } else if (*compare) {
      const auto base = build_config(cmp);
      std::vector<std::pair<std::string, EncoderConfig>> variants;
      std::size_t pos = 0;
      while (pos <= cmp_modes.size()) {
        const auto comma = cmp_modes.find(',', pos);
        auto name = cmp_modes.substr(pos, comma == std::string::npos ? std::string::npos
                                                                      : comma - pos);
        auto c = base;
        c.mode = parse_mode(name);
        variants.emplace_back(name, c);
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      if (cmp_intra) variants.emplace_back("intra", intra_only(base));
      std::vector<Cell> cells;
      for (const auto& in : cmp_in)
        for (const auto& [name, c] : variants) {
          cells.push_back(run_cell(in, name, c));
          const auto& x = cells.back();
          if (x.ok)
            std::printf("%-30s %-6s %8.4f bpp %10zu bytes %7.2f s\n", x.input.c_str(),
                        x.mode.c_str(), x.bpp, x.bytes, x.seconds);
          else
            std::printf("%-30s %-6s FAILED: %s\n", x.input.c_str(), x.mode.c_str(),
                        x.error.c_str());
          std::fflush(stdout);
        }
      if (!cmp_csv.empty()) {
        std::string csv = "input,mode,ok,bpp,bytes,seconds,error\n";
        for (const auto& x : cells) {
          char buf[128];
          std::snprintf(buf, sizeof buf, ",%s,%d,%.6f,%zu,%.3f,", x.mode.c_str(), x.ok ? 1 : 0,
                        x.bpp, x.bytes, x.seconds);
          std::string err = x.error;
          for (auto& ch : err)
            if (ch == ',' || ch == '\n') ch = ';';
          csv += x.input + buf + err + "\n";
        }
        write_file_atomic(cmp_csv, std::vector<std::uint8_t>(csv.begin(), csv.end()));
      }
      for (const auto& x : cells)
        if (!x.ok) return kExitFailure;
    } else if (*synth_cmd) {
      const auto d = parse_dims(syn_dims);
      const auto lf = synth::generate(syn_kind, Dims4{d[0], d[1], d[2], d[3]}, syn_planes, syn_bd,
                                      syn_seed, syn_disp, syn_value);
      store(lf, syn_out, layout_of(syn_layout));
    } else if (*convert) {
      require_input(cvt_in);
      store(load(cvt_in, input_layout(cvt_in)), cvt_out, layout_of(cvt_layout));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
