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

#include "lfmrp/preprocess.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "lfmrp/error.hpp"

namespace lfmrp {

PackTable::PackTable(std::vector<std::int32_t> values) : values_(std::move(values)) {
  if (std::adjacent_find(values_.begin(), values_.end(),
                         [](auto a, auto b) { return a >= b; }) != values_.end())
    fail(ErrorKind::kArgument, "pack table must be strictly increasing");
}

std::int32_t PackTable::index_of_value(std::int32_t v) const {
  auto it = std::lower_bound(values_.begin(), values_.end(), v);
  if (it == values_.end() || *it != v)
    fail(ErrorKind::kArgument, "value " + std::to_string(v) + " not in pack table");
  return static_cast<std::int32_t>(it - values_.begin());
}

std::pair<std::vector<std::int32_t>, PackTable> pack_histogram(
    std::span<const std::int32_t> plane) {
  std::vector<std::int32_t> values(plane.begin(), plane.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  PackTable table(std::move(values));
  std::vector<std::int32_t> packed(plane.size());
  for (std::size_t i = 0; i < plane.size(); ++i) packed[i] = table.index_of_value(plane[i]);
  return {std::move(packed), std::move(table)};
}

std::vector<std::int32_t> unpack_histogram(std::span<const std::int32_t> packed,
                                           const PackTable& table) {
  const auto k = static_cast<std::int32_t>(table.size());
  std::vector<std::int32_t> out(packed.size());
  for (std::size_t i = 0; i < packed.size(); ++i) {
    if (packed[i] < 0 || packed[i] >= k)
      fail(ErrorKind::kArgument, "packed index outside the pack table");
    out[i] = table.value_of_index(packed[i]);
  }
  return out;
}

std::uint64_t total_variation(std::span<const std::int32_t> plane, std::size_t sai_size) {
  std::uint64_t tv = 0;
  for (std::size_t i = 0; i < plane.size(); ++i) {
    if (i % sai_size == 0) continue;
    tv += static_cast<std::uint64_t>(std::abs(plane[i] - plane[i - 1]));
  }
  return tv;
}

bool should_pack(std::span<const std::int32_t> plane, std::size_t sai_size) {
  const auto packed = pack_histogram(plane).first;
  return total_variation(packed, sai_size) < total_variation(plane, sai_size);
}

}  // namespace lfmrp
