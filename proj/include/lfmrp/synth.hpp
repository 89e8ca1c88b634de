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

#ifndef LFMRP_SYNTH_HPP
#define LFMRP_SYNTH_HPP

#include <cstdint>
#include <string>

#include "lfmrp/lightfield.hpp"

namespace lfmrp::synth {

/// Every sample equal to `value`.
LightField4D constant(const Dims4& dims, int planes, int bit_depth, std::uint32_t value);

/// Independent uniform samples over the full range.
LightField4D noise(const Dims4& dims, int planes, int bit_depth, std::uint64_t seed);

/// Each SAI (t, s) shows a textured base image shifted by (k * t, k * s)
/// pixels, plus small per-sample noise of amplitude `noise_amplitude`.
LightField4D shifted(const Dims4& dims, int planes, int bit_depth, int disparity,
                     std::uint64_t seed, int noise_amplitude = 1);

/// Dispatch by generator name ("constant", "noise", "shifted").
LightField4D generate(const std::string& kind, const Dims4& dims, int planes, int bit_depth,
                      std::uint64_t seed, int disparity = 1, std::uint32_t value = 0);

}  // namespace lfmrp::synth

#endif  // LFMRP_SYNTH_HPP
