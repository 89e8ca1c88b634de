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
// Python bindings. Light fields cross the boundary as uint16 arrays shaped
// (planes, T, S, V, U); bitstreams as bytes.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>
#include <vector>

#include "lfmrp/codec.hpp"
#include "lfmrp/error.hpp"
#include "lfmrp/synth.hpp"

namespace py = pybind11;
using namespace lfmrp;

namespace {

using Samples = py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>;

Samples to_array(const LightField4D& lf) {
  const Dims4& d = lf.dims();
  Samples out({static_cast<py::ssize_t>(lf.planes()), static_cast<py::ssize_t>(d.t),
               static_cast<py::ssize_t>(d.s), static_cast<py::ssize_t>(d.v),
               static_cast<py::ssize_t>(d.u)});
  std::memcpy(out.mutable_data(), lf.samples().data(), lf.samples().size_bytes());
  return out;
}

LightField4D from_array(const Samples& a, int bit_depth) {
  if (a.ndim() != 5) throw Error(ErrorKind::kArgument, "expected an array shaped (planes, T, S, V, U)");
  const Dims4 d{static_cast<std::uint32_t>(a.shape(1)), static_cast<std::uint32_t>(a.shape(2)),
                static_cast<std::uint32_t>(a.shape(3)), static_cast<std::uint32_t>(a.shape(4))};
  LightField4D lf(d, static_cast<int>(a.shape(0)), bit_depth);
  for (int p = 0; p < lf.planes(); ++p) {
    auto dst = lf.plane(p);
    std::memcpy(dst.data(), a.data() + p * d.count(), dst.size_bytes());
  }
  lf.validate();
  return lf;
}

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
  return {reinterpret_cast<const char*>(v.data()), v.size()};
}

std::vector<std::uint8_t> from_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

Layout layout_of(const std::string& name) {
  if (name == "container") return Layout::kPlanarRaw;
  if (name == "sai-grid") return Layout::kSaiGrid;
  throw Error(ErrorKind::kArgument, "unknown layout '" + name + "'");
}

py::dict fields_dict(const std::vector<std::pair<std::string, std::string>>& fields) {
  py::dict out;
  for (const auto& [k, v] : fields) out[py::str(k)] = v;
  return out;
}

EncoderConfig make_config(const std::string& mode, const py::dict& options) {
  EncoderConfig cfg;
  apply_config_entry(cfg, "mode", mode);
  for (const auto& [k, v] : options) apply_config_entry(cfg, py::str(k), py::str(v));
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_lfmrp, m) {
  m.doc() = "Lossless 4D light-field coding with minimum-rate predictors";

  // Types live as long as the interpreter; the raw pointers are never freed.
  static PyObject* const base = PyErr_NewException("lfmrp._lfmrp.Error", PyExc_ValueError, nullptr);
  static PyObject* const kinds[] = {
      PyErr_NewException("lfmrp._lfmrp.FormatError", base, nullptr),
      PyErr_NewException("lfmrp._lfmrp.IntegrityError", base, nullptr),
      PyErr_NewException("lfmrp._lfmrp.ArgumentError", base, nullptr)};
  m.attr("Error") = py::handle(base);
  m.attr("FormatError") = py::handle(kinds[0]);
  m.attr("IntegrityError") = py::handle(kinds[1]);
  m.attr("ArgumentError") = py::handle(kinds[2]);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(kinds[static_cast<int>(e.kind())], e.what());
    }
  });

  m.def(
      "encode",
      [](const Samples& samples, int bit_depth, const std::string& mode, const py::dict& options) {
        const auto lf = from_array(samples, bit_depth);
        const auto cfg = make_config(mode, options);
        EncodeReport report;
        std::vector<std::uint8_t> stream;
        {
          py::gil_scoped_release release;
          stream = encode_lightfield(lf, cfg, &report);
        }
        return py::make_tuple(to_bytes(stream), fields_dict(report_fields(report)));
      },
      py::arg("samples"), py::arg("bit_depth"), py::arg("mode") = "4d",
      py::arg("options") = py::dict(),
      "Encode samples; returns (bitstream, report). `options` holds config key/values.");

  m.def(
      "decode",
      [](const py::bytes& stream) {
        const auto bytes = from_bytes(stream);
        LightField4D lf;
        {
          py::gil_scoped_release release;
          lf = decode_lightfield(bytes);
        }
        return py::make_tuple(to_array(lf), lf.bit_depth());
      },
      py::arg("stream"), "Decode a bitstream; returns (samples, bit_depth).");

  m.def(
      "inspect",
      [](const py::bytes& stream) { return fields_dict(report_fields(inspect_stream(from_bytes(stream)))); },
      py::arg("stream"));

  m.def(
      "synth",
      [](const std::string& kind, std::vector<std::uint32_t> dims, int planes, int bit_depth,
         std::uint64_t seed, int disparity, std::uint32_t value) {
        if (dims.size() != 4) throw Error(ErrorKind::kArgument, "dims must have four entries");
        return to_array(synth::generate(kind, Dims4{dims[0], dims[1], dims[2], dims[3]}, planes,
                                        bit_depth, seed, disparity, value));
      },
      py::arg("kind"), py::arg("dims"), py::arg("planes") = 1, py::arg("bit_depth") = 8,
      py::arg("seed") = 0, py::arg("disparity") = 1, py::arg("value") = 0);

  m.def(
      "load",
      [](const std::string& path, const std::string& layout) {
        const auto lf = load(path, layout_of(layout));
        return py::make_tuple(to_array(lf), lf.bit_depth());
      },
      py::arg("path"), py::arg("layout") = "container");

  m.def(
      "store",
      [](const Samples& samples, int bit_depth, const std::string& path, const std::string& layout) {
        store(from_array(samples, bit_depth), path,
              layout_of(layout));
      },
      py::arg("samples"), py::arg("bit_depth"), py::arg("path"), py::arg("layout") = "container");
}
