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

#include "osdf/rotation.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace osdf {
namespace {

constexpr double kDegenerate = 1e-8;

struct GramSchmidt {
  Vec3 b1, b2, b3;
  double n1, n2;
  double a2_dot_b1;
};

GramSchmidt orthonormalize(const Mat3& m) {
  GramSchmidt gs;
  const Vec3 a1 = m.col(0), a2 = m.col(1), a3 = m.col(2);
  gs.n1 = a1.norm();
  if (!(gs.n1 >= kDegenerate)) throw DegenerateRotationError("rot9_to_so3: first column is (near) zero");
  gs.b1 = a1 / gs.n1;
  gs.a2_dot_b1 = gs.b1.dot(a2);
  const Vec3 u2 = a2 - gs.a2_dot_b1 * gs.b1;
  gs.n2 = u2.norm();
  if (!(gs.n2 >= kDegenerate * std::max(1.0, a2.norm())))
    throw DegenerateRotationError("rot9_to_so3: first two columns are parallel");
  gs.b2 = u2 / gs.n2;
  const Vec3 u3 = a3 - gs.b1.dot(a3) * gs.b1 - gs.b2.dot(a3) * gs.b2;
  if (!(u3.norm() >= kDegenerate * std::max(1.0, a3.norm())))
    throw DegenerateRotationError("rot9_to_so3: columns are rank-deficient");
  // u3 / |u3| is +-(b1 x b2); the sign correction picks the + branch.
  gs.b3 = gs.b1.cross(gs.b2);
  return gs;
}

}  // namespace

RotationParam9 RotationParam9::from_flat(const std::array<double, 9>& v) {
  RotationParam9 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.raw(i, j) = v[static_cast<std::size_t>(3 * i + j)];
  return r;
}

std::array<double, 9> RotationParam9::flat() const {
  std::array<double, 9> v{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v[static_cast<std::size_t>(3 * i + j)] = raw(i, j);
  return v;
}

Mat3 rot9_to_so3(const RotationParam9& raw) {
  if (!raw.raw.allFinite()) throw DegenerateRotationError("rot9_to_so3: non-finite input");
  const GramSchmidt gs = orthonormalize(raw.raw);
  Mat3 r;
  r.col(0) = gs.b1;
  r.col(1) = gs.b2;
  r.col(2) = gs.b3;
  return r;
}

Mat3 rot9_to_so3_vjp(const RotationParam9& raw, const Mat3& g) {
  const GramSchmidt gs = orthonormalize(raw.raw);
  const Vec3 g1 = g.col(0), g2 = g.col(1), g3 = g.col(2);
  // b3 = b1 x b2
  Vec3 gb1 = g1 + gs.b2.cross(g3);
  const Vec3 gb2 = g2 + g3.cross(gs.b1);
  // b2 = u2 / |u2|
  const Vec3 gu2 = (gb2 - gs.b2 * gs.b2.dot(gb2)) / gs.n2;
  // u2 = a2 - (b1 . a2) b1
  const Vec3 a2 = raw.raw.col(1);
  const Vec3 ga2 = gu2 - gs.b1 * gs.b1.dot(gu2);
  gb1 -= gs.a2_dot_b1 * gu2 + a2 * gs.b1.dot(gu2);
  // b1 = a1 / |a1|
  const Vec3 ga1 = (gb1 - gs.b1 * gs.b1.dot(gb1)) / gs.n1;
  Mat3 out;
  out.col(0) = ga1;
  out.col(1) = ga2;
  out.col(2) = Vec3::Zero();
  return out;
}

Mat3 axis_rotation(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

double rotation_angle(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

Mat3 normalize_symmetric_rotation(const Mat3& rotation, const Vec3& axis_in) {
  const double an = axis_in.norm();
  if (!(an > 0.0)) throw ConfigError("normalize_symmetric_rotation: axis must be nonzero");
  const Vec3 axis = axis_in / an;
  auto orthogonal_part = [&](const Vec3& v) { return Vec3(v - v.dot(axis) * axis); };
  Vec3 reference = orthogonal_part(Vec3::UnitX());
  if (reference.norm() < 0.5) reference = orthogonal_part(Vec3::UnitZ());
  reference.normalize();

  const Vec3 spun_axis = rotation * axis;
  Vec3 target = Vec3(reference - reference.dot(spun_axis) * spun_axis);
  if (target.norm() < 1e-3) {
    const Vec3 alt = axis.cross(reference);
    target = alt - alt.dot(spun_axis) * spun_axis;
  }
  target.normalize();
  // Rot_axis(theta) * reference should equal R^T target.
  const Vec3 f = rotation.transpose() * target;
  const double theta = std::atan2(axis.dot(reference.cross(f)), reference.dot(f));
  return rotation * axis_rotation(axis, theta);
}

void Pose::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("pose scale must be positive");
  if (!translation.allFinite()) throw ConfigError("pose translation must be finite");
  if ((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6 ||
      std::abs(rotation.determinant() - 1.0) > 1e-6)
    throw ConfigError("pose rotation is not in SO(3)");
}

std::array<double, 13> pose_to_raw(const Pose& pose, const RotationParam9& raw) {
  std::array<double, 13> out{};
  const auto r = raw.flat();
  std::copy(r.begin(), r.end(), out.begin());
  for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(9 + i)] = pose.translation[i];
  out[12] = pose.scale;
  return out;
}

Pose pose_from_raw(const std::array<double, 13>& raw) {
  std::array<double, 9> r{};
  std::copy(raw.begin(), raw.begin() + 9, r.begin());
  Pose p;
  p.rotation = rot9_to_so3(RotationParam9::from_flat(r));
  p.translation = Vec3(raw[9], raw[10], raw[11]);
  p.scale = raw[12];
  return p;
}

std::string format_pose(const Pose& pose, const RotationParam9& raw) {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  const auto values = pose_to_raw(pose, raw);
  os << "# raw pose: rotation9 (row-major) translation3 scale1\n";
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? " " : "") << num(values[i]);
  os << "\n# rotation (orthonormalized, row-major)\n";
  for (int i = 0; i < 3; ++i)
    os << num(pose.rotation(i, 0)) << ' ' << num(pose.rotation(i, 1)) << ' ' << num(pose.rotation(i, 2)) << '\n';
  return os.str();
}

Pose parse_pose(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> values;
  while (values.size() < 13 && std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double v;
    while (values.size() < 13 && ls >> v) values.push_back(v);
  }
  if (values.size() < 13) throw FormatError("pose file: expected 13 numbers");
  std::array<double, 13> raw{};
  std::copy(values.begin(), values.end(), raw.begin());
  Pose p = pose_from_raw(raw);
  p.validate();
  return p;
}

void write_pose(const std::filesystem::path& path, const Pose& pose, const RotationParam9& raw) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << format_pose(pose, raw);
}

Pose read_pose(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_pose(ss.str());
}

}  // namespace osdf
