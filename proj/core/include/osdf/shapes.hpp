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

// Procedural ground-truth shapes and colors in the canonical [-1,1]^3 frame.

#include <filesystem>
#include <string>
#include <vector>

#include "osdf/common.hpp"

namespace osdf {

enum class ShapeKind { kSphere, kBox, kCylinder, kTorus, kCapsule, kSuperellipsoid };
enum class ColorKind { kSolid, kAxisGradient, kBands };

struct ColorSpec {
  ColorKind kind = ColorKind::kSolid;
  Vec3 primary{0.5, 0.5, 0.5};
  Vec3 secondary{0.5, 0.5, 0.5};
  int axis = 1;
  // Bands per unit length along axis (two-tone bands only).
  double frequency = 2.0;
};

// Parameters by kind (all lengths in canonical units):
//   sphere          radius
//   box             half_extents
//   cylinder        radius, half_height (axis y)
//   torus           major_radius, minor_radius (ring in the xz plane)
//   capsule         radius, half_height (segment along y)
//   superellipsoid  half_extents, exponents (e1 along y, e2 in xz)
struct ShapeSpec {
  std::string name;
  ShapeKind kind = ShapeKind::kSphere;
  double radius = 0.5;
  Vec3 half_extents{0.5, 0.5, 0.5};
  double half_height = 0.5;
  double major_radius = 0.5;
  double minor_radius = 0.2;
  double e1 = 1.0;
  double e2 = 1.0;
  ColorSpec color;
  int category = 0;

  static ShapeSpec sphere(double r, int category = 0);
  static ShapeSpec box(const Vec3& half, int category = 0);
  static ShapeSpec cylinder(double r, double half_height, int category = 0);
  static ShapeSpec torus(double major, double minor, int category = 0);
  static ShapeSpec capsule(double r, double half_height, int category = 0);
  static ShapeSpec superellipsoid(const Vec3& half, double e1, double e2, int category = 0);

  ShapeSpec& with_color(const ColorSpec& c) {
    color = c;
    return *this;
  }
  ShapeSpec& named(std::string n) {
    name = std::move(n);
    return *this;
  }
};

void validate(const ShapeSpec& spec);

// Exact for every kind except the superellipsoid, which uses the first-order
// estimate (f - 1) / |grad f| of its radial inside-outside function f: the
// sign is exact and the error is below 1e-3 within 0.02 of the surface.
double analytic_sdf(const ShapeSpec& spec, const Vec3& p);

// Spatial gradient of analytic_sdf (unit length where the SDF is exact and
// differentiable; central differences for the superellipsoid).
Vec3 analytic_sdf_gradient(const ShapeSpec& spec, const Vec3& p);

// Color in [0,1]^3 at p; meaningful near the surface.
Vec3 analytic_color(const ShapeSpec& spec, const Vec3& p);

// Volume of the solid, for sampling checks.
double analytic_volume(const ShapeSpec& spec);

std::string to_string(ShapeKind kind);
ShapeKind parse_shape_kind(const std::string& name);

// JSON shape-spec file:
//   {"objects": [{"name": "...", "kind": "box", "half_extents": [..], "category": 1,
//                 "color": {"type": "axis_gradient", "primary": [..], "secondary": [..], "axis": 1}}]}
std::vector<ShapeSpec> parse_shape_specs(const std::string& json_text);
std::vector<ShapeSpec> load_shape_specs(const std::filesystem::path& path);
std::string dump_shape_specs(const std::vector<ShapeSpec>& specs);

// Small procedural database: four categories (ball, box, can, capsule),
// four training objects each and one or two held-out objects per category.
struct DeskSet {
  std::vector<std::string> categories;
  std::vector<ShapeSpec> train;
  std::vector<ShapeSpec> held_out;
};
DeskSet desk_set();

}  // namespace osdf
