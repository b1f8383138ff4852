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

// PLY point clouds: x y z nx ny nz (float) red green blue (uchar).

#include <filesystem>
#include <string>
#include <vector>

#include "osdf/common.hpp"

namespace osdf {

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // optional, same length as points when present
  std::vector<Vec3> colors;   // optional, in [0,1]
};

enum class PlyFormat { kAscii, kBinaryLittleEndian };

std::string encode_ply(const PointCloud& cloud, PlyFormat format);
// Accepts both formats; normals and colors are read when present.
PointCloud decode_ply(const std::string& bytes);

void write_ply(const std::filesystem::path& path, const PointCloud& cloud, PlyFormat format = PlyFormat::kBinaryLittleEndian);
PointCloud read_ply(const std::filesystem::path& path);

std::uint8_t color_to_u8(double c);

}  // namespace osdf
