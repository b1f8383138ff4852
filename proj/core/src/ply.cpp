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

#include "osdf/ply.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace osdf {
namespace {

static_assert(std::endian::native == std::endian::little, "PLY binary I/O assumes a little-endian host");

struct Property {
  std::string name;
  std::string type;
};

std::size_t type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  throw FormatError("ply: unsupported property type '" + t + "'");
}

double read_binary(const char* p, const std::string& t) {
  auto get = [p]<typename V>(V) {
    V v;
    std::memcpy(&v, p, sizeof(V));
    return static_cast<double>(v);
  };
  if (t == "char" || t == "int8") return get(std::int8_t{});
  if (t == "uchar" || t == "uint8") return get(std::uint8_t{});
  if (t == "short" || t == "int16") return get(std::int16_t{});
  if (t == "ushort" || t == "uint16") return get(std::uint16_t{});
  if (t == "int" || t == "int32") return get(std::int32_t{});
  if (t == "uint" || t == "uint32") return get(std::uint32_t{});
  if (t == "float" || t == "float32") return get(float{});
  return get(double{});
}

bool is_integer_type(const std::string& t) { return t != "float" && t != "float32" && t != "double" && t != "float64"; }

void append_f32(std::string& out, float v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

}  // namespace

std::uint8_t color_to_u8(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

std::string encode_ply(const PointCloud& cloud, PlyFormat format) {
  const std::size_t n = cloud.points.size();
  if (!cloud.normals.empty() && cloud.normals.size() != n) throw ConfigError("ply: normals count mismatch");
  if (!cloud.colors.empty() && cloud.colors.size() != n) throw ConfigError("ply: colors count mismatch");
  std::ostringstream head;
  head << "ply\nformat " << (format == PlyFormat::kAscii ? "ascii" : "binary_little_endian") << " 1.0\n"
       << "element vertex " << n << "\n"
       << "property float x\nproperty float y\nproperty float z\n"
       << "property float nx\nproperty float ny\nproperty float nz\n"
       << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
       << "end_header\n";
  std::string out = head.str();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = cloud.points[i];
    const Vec3 nn = cloud.normals.empty() ? Vec3::Zero() : cloud.normals[i];
    const Vec3 c = cloud.colors.empty() ? Vec3::Zero() : cloud.colors[i];
    const std::uint8_t rgb[3] = {color_to_u8(c.x()), color_to_u8(c.y()), color_to_u8(c.z())};
    if (format == PlyFormat::kAscii) {
      char line[256];
      std::snprintf(line, sizeof line, "%.9g %.9g %.9g %.9g %.9g %.9g %u %u %u\n", static_cast<float>(p.x()),
                    static_cast<float>(p.y()), static_cast<float>(p.z()), static_cast<float>(nn.x()),
                    static_cast<float>(nn.y()), static_cast<float>(nn.z()), rgb[0], rgb[1], rgb[2]);
      out += line;
    } else {
      for (int k = 0; k < 3; ++k) append_f32(out, static_cast<float>(p[k]));
      for (int k = 0; k < 3; ++k) append_f32(out, static_cast<float>(nn[k]));
      out.append(reinterpret_cast<const char*>(rgb), 3);
    }
  }
  return out;
}

PointCloud decode_ply(const std::string& bytes) {
  std::size_t header_end = bytes.find("end_header");
  if (bytes.rfind("ply", 0) != 0 || header_end == std::string::npos) throw FormatError("ply: missing header");
  std::size_t body = bytes.find('\n', header_end);
  if (body == std::string::npos) throw FormatError("ply: truncated header");
  ++body;

  std::istringstream head(bytes.substr(0, header_end));
  std::string line;
  bool binary = false;
  std::size_t count = 0;
  bool in_vertex = false;
  bool vertex_seen = false;
  std::vector<Property> props;
  while (std::getline(head, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string f;
      ls >> f;
      if (f == "binary_little_endian") binary = true;
      else if (f != "ascii") throw FormatError("ply: unsupported format '" + f + "'");
    } else if (word == "element") {
      std::string name;
      ls >> name;
      in_vertex = name == "vertex";
      if (in_vertex) {
        if (vertex_seen) throw FormatError("ply: duplicate vertex element");
        ls >> count;
        vertex_seen = true;
      } else if (!vertex_seen) {
        throw FormatError("ply: vertex element must come first");
      }
    } else if (word == "property" && in_vertex) {
      Property p;
      ls >> p.type;
      if (p.type == "list") throw FormatError("ply: list properties on vertices are not supported");
      ls >> p.name;
      props.push_back(p);
    }
  }
  if (!vertex_seen) throw FormatError("ply: no vertex element");

  auto index_of = [&](const char* name) -> int {
    for (std::size_t i = 0; i < props.size(); ++i)
      if (props[i].name == name) return static_cast<int>(i);
    return -1;
  };
  const int ix = index_of("x"), iy = index_of("y"), iz = index_of("z");
  if (ix < 0 || iy < 0 || iz < 0) throw FormatError("ply: x, y and z properties are required");
  const int inx = index_of("nx"), iny = index_of("ny"), inz = index_of("nz");
  const int ir = index_of("red"), ig = index_of("green"), ib = index_of("blue");
  const bool has_normals = inx >= 0 && iny >= 0 && inz >= 0;
  const bool has_colors = ir >= 0 && ig >= 0 && ib >= 0;

  PointCloud cloud;
  cloud.points.reserve(count);
  std::vector<double> row(props.size());
  auto emit = [&] {
    cloud.points.emplace_back(row[ix], row[iy], row[iz]);
    if (has_normals) cloud.normals.emplace_back(row[inx], row[iny], row[inz]);
    if (has_colors) {
      const double s = is_integer_type(props[static_cast<std::size_t>(ir)].type) ? 1.0 / 255.0 : 1.0;
      cloud.colors.emplace_back(row[ir] * s, row[ig] * s, row[ib] * s);
    }
  };

  if (binary) {
    std::size_t stride = 0;
    std::vector<std::size_t> offsets;
    for (const auto& p : props) {
      offsets.push_back(stride);
      stride += type_size(p.type);
    }
    if (body + stride * count > bytes.size()) throw FormatError("ply: truncated binary body");
    for (std::size_t v = 0; v < count; ++v) {
      const char* base = bytes.data() + body + v * stride;
      for (std::size_t k = 0; k < props.size(); ++k) row[k] = read_binary(base + offsets[k], props[k].type);
      emit();
    }
  } else {
    std::istringstream in(bytes.substr(body));
    for (std::size_t v = 0; v < count; ++v) {
      for (std::size_t k = 0; k < props.size(); ++k)
        if (!(in >> row[k])) throw FormatError("ply: truncated ascii body");
      emit();
    }
  }
  return cloud;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud, PlyFormat format) {
  const std::string data = encode_ply(cloud, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("failed writing " + path.string());
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_ply(data);
}

}  // namespace osdf
