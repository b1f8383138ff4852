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

// Pose parameterization: 9D rotation head, translation, scale.

#include <array>
#include <filesystem>
#include <string>

#include "osdf/common.hpp"

namespace osdf {

// Nine unconstrained reals, interpreted as a 3x3 matrix whose columns are
// orthonormalized. Flattened in row-major order.
struct RotationParam9 {
  Mat3 raw = Mat3::Identity();

  static RotationParam9 from_flat(const std::array<double, 9>& v);
  std::array<double, 9> flat() const;
};

// Gram-Schmidt on the columns; the third axis is the sign-corrected
// orthogonal complement, so det = +1. Throws DegenerateRotationError if the
// first column is below 1e-8 or the columns are rank-deficient.
Mat3 rot9_to_so3(const RotationParam9& raw);

// dL/draw given dL/dR for R = rot9_to_so3(raw).
Mat3 rot9_to_so3_vjp(const RotationParam9& raw, const Mat3& rotation_cotangent);

// R * Rot_axis(theta) with theta chosen so that the rotated reference
// direction (orthogonal to axis) is as close as possible to a fixed camera
// direction. Idempotent, and invariant to R -> R * Rot_axis(alpha).
Mat3 normalize_symmetric_rotation(const Mat3& rotation, const Vec3& axis = Vec3::UnitY());

Mat3 axis_rotation(const Vec3& axis, double angle);
// Geodesic angle between two rotations, radians.
double rotation_angle(const Mat3& a, const Mat3& b);

struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;

  // Canonical -> camera: s R q + t.
  Vec3 apply(const Vec3& q) const { return scale * (rotation * q) + translation; }
  // Camera -> canonical.
  Vec3 inverse_apply(const Vec3& y) const { return rotation.transpose() * (y - translation) / scale; }
  // Throws ConfigError unless R is a rotation within 1e-6 and scale > 0.
  void validate() const;
};

// The thirteen raw numbers: 9 rotation (row-major), 3 translation, 1 scale.
std::array<double, 13> pose_to_raw(const Pose& pose, const RotationParam9& raw);
Pose pose_from_raw(const std::array<double, 13>& raw);

std::string format_pose(const Pose& pose, const RotationParam9& raw);
// Parses the first 13 numbers of a pose file (lines starting with '#' are
// skipped) and orthonormalizes the rotation.
Pose parse_pose(const std::string& text);
void write_pose(const std::filesystem::path& path, const Pose& pose, const RotationParam9& raw);
Pose read_pose(const std::filesystem::path& path);

}  // namespace osdf
