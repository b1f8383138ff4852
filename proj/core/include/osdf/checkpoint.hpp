/*
 * Copyright 2026 The osdf Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Binary checkpoint: shape network, optional texture network, latent table.
//
//   "OSDF" | u32 version | u32 d_sdf | u32 d_tex | u32 network_count
//   per network:
//     u32 kind | u32 layer_count | f32 omega0
//     per layer: u32 rows | u32 cols | u32 activation
//     per layer: f32 weight[rows*cols] (row-major) | f32 bias[rows]
//   u32 object_count | u32 d_sdf | u32 d_tex
//   per object: i32 category | f32 shape[d_sdf] | f32 texture[d_tex]
//
// All integers and floats little-endian.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "osdf/field_net.hpp"

namespace osdf {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct LatentTable {
  int d_sdf = 0;
  int d_tex = 0;
  std::vector<LatentCode> codes;

  std::size_t size() const { return codes.size(); }
};

struct Checkpoint {
  FieldNetwork shape;
  std::optional<FieldNetwork> texture;
  LatentTable latents;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace osdf
