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

#include "osdf/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

namespace osdf {
namespace {

using json = nlohmann::json;

double superellipsoid_radial(const ShapeSpec& s, const Vec3& p) {
  const Vec3& h = s.half_extents;
  const double xz = std::pow(std::abs(p.x() / h.x()), 2.0 / s.e2) + std::pow(std::abs(p.z() / h.z()), 2.0 / s.e2);
  const double f = std::pow(xz, s.e2 / s.e1) + std::pow(std::abs(p.y() / h.y()), 2.0 / s.e1);
  return std::pow(f, s.e1 / 2.0);
}

double superellipsoid_sdf(const ShapeSpec& s, const Vec3& p) {
  const double f = superellipsoid_radial(s, p);
  constexpr double h = 1e-6;
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    Vec3 a = p, b = p;
    a[i] += h;
    b[i] -= h;
    g[i] = (superellipsoid_radial(s, a) - superellipsoid_radial(s, b)) / (2 * h);
  }
  const double gn = g.norm();
  if (gn < 1e-12) return (f - 1.0) * s.half_extents.minCoeff();
  return (f - 1.0) / gn;
}

// 2D box distance from per-axis offsets q = |u| - half, with its gradient in
// the (q.x, q.y) frame.
double box2(double qx, double qy, double& gx, double& gy) {
  const double ox = std::max(qx, 0.0);
  const double oy = std::max(qy, 0.0);
  const double outside = std::hypot(ox, oy);
  if (outside > 0.0) {
    gx = ox / outside;
    gy = oy / outside;
    return outside;
  }
  if (qx > qy) {
    gx = 1.0;
    gy = 0.0;
    return qx;
  }
  gx = 0.0;
  gy = 1.0;
  return qy;
}

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

Vec3 read_vec3(const json& j, const char* key, const Vec3& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) throw ConfigError(std::string("shape spec: '") + key + "' must be a 3-array");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

ColorKind parse_color_kind(const std::string& s) {
  if (s == "solid") return ColorKind::kSolid;
  if (s == "axis_gradient") return ColorKind::kAxisGradient;
  if (s == "bands") return ColorKind::kBands;
  throw ConfigError("shape spec: unknown color type '" + s + "'");
}

std::string color_kind_name(ColorKind k) {
  switch (k) {
    case ColorKind::kSolid:
      return "solid";
    case ColorKind::kAxisGradient:
      return "axis_gradient";
    case ColorKind::kBands:
      return "bands";
  }
  return "solid";
}

}  // namespace

ShapeSpec ShapeSpec::sphere(double r, int category) {
  ShapeSpec s;
  s.kind = ShapeKind::kSphere;
  s.radius = r;
  s.category = category;
  return s;
}

ShapeSpec ShapeSpec::box(const Vec3& half, int category) {
  ShapeSpec s;
  s.kind = ShapeKind::kBox;
  s.half_extents = half;
  s.category = category;
  return s;
}

ShapeSpec ShapeSpec::cylinder(double r, double half_height, int category) {
  ShapeSpec s;
  s.kind = ShapeKind::kCylinder;
  s.radius = r;
  s.half_height = half_height;
  s.category = category;
  return s;
}

ShapeSpec ShapeSpec::torus(double major, double minor, int category) {
  ShapeSpec s;
  s.kind = ShapeKind::kTorus;
  s.major_radius = major;
  s.minor_radius = minor;
  s.category = category;
  return s;
}

ShapeSpec ShapeSpec::capsule(double r, double half_height, int category) {
  ShapeSpec s;
  s.kind = ShapeKind::kCapsule;
  s.radius = r;
  s.half_height = half_height;
  s.category = category;
  return s;
}

ShapeSpec ShapeSpec::superellipsoid(const Vec3& half, double e1, double e2, int category) {
  ShapeSpec s;
  s.kind = ShapeKind::kSuperellipsoid;
  s.half_extents = half;
  s.e1 = e1;
  s.e2 = e2;
  s.category = category;
  return s;
}

void validate(const ShapeSpec& s) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  bool ok = true;
  switch (s.kind) {
    case ShapeKind::kSphere:
      ok = positive(s.radius) && s.radius <= 1.0;
      break;
    case ShapeKind::kBox:
    case ShapeKind::kSuperellipsoid:
      ok = positive(s.half_extents.x()) && positive(s.half_extents.y()) && positive(s.half_extents.z()) &&
           s.half_extents.maxCoeff() <= 1.0;
      if (s.kind == ShapeKind::kSuperellipsoid)
        ok = ok && s.e1 >= 0.2 && s.e1 <= 2.0 && s.e2 >= 0.2 && s.e2 <= 2.0;
      break;
    case ShapeKind::kCylinder:
      ok = positive(s.radius) && positive(s.half_height) && s.radius <= 1.0 && s.half_height <= 1.0;
      break;
    case ShapeKind::kCapsule:
      ok = positive(s.radius) && positive(s.half_height) && s.radius <= 1.0 && s.half_height + s.radius <= 1.0;
      break;
    case ShapeKind::kTorus:
      ok = positive(s.major_radius) && positive(s.minor_radius) && s.minor_radius < s.major_radius &&
           s.major_radius + s.minor_radius <= 1.0;
      break;
  }
  if (!ok) throw ConfigError("shape '" + s.name + "' (" + to_string(s.kind) + ") has invalid parameters");
  for (const Vec3* c : {&s.color.primary, &s.color.secondary})
    if ((c->array() < 0.0).any() || (c->array() > 1.0).any())
      throw ConfigError("shape '" + s.name + "': colors must lie in [0,1]");
  if (s.color.axis < 0 || s.color.axis > 2) throw ConfigError("shape '" + s.name + "': color axis must be 0, 1 or 2");
}

double analytic_sdf(const ShapeSpec& s, const Vec3& p) {
  switch (s.kind) {
    case ShapeKind::kSphere:
      return p.norm() - s.radius;
    case ShapeKind::kBox: {
      const Vec3 q = p.cwiseAbs() - s.half_extents;
      return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
    }
    case ShapeKind::kCylinder: {
      double gx, gy;
      return box2(std::hypot(p.x(), p.z()) - s.radius, std::abs(p.y()) - s.half_height, gx, gy);
    }
    case ShapeKind::kTorus: {
      const double qx = std::hypot(p.x(), p.z()) - s.major_radius;
      return std::hypot(qx, p.y()) - s.minor_radius;
    }
    case ShapeKind::kCapsule: {
      const double y = std::clamp(p.y(), -s.half_height, s.half_height);
      return (p - Vec3(0, y, 0)).norm() - s.radius;
    }
    case ShapeKind::kSuperellipsoid:
      return superellipsoid_sdf(s, p);
  }
  throw ConfigError("unknown shape kind");
}

Vec3 analytic_sdf_gradient(const ShapeSpec& s, const Vec3& p) {
  auto safe_unit = [](const Vec3& v, const Vec3& fallback) {
    const double n = v.norm();
    return n > 0.0 ? Vec3(v / n) : fallback;
  };
  switch (s.kind) {
    case ShapeKind::kSphere:
      return safe_unit(p, Vec3::UnitY());
    case ShapeKind::kBox: {
      const Vec3 q = p.cwiseAbs() - s.half_extents;
      const Vec3 sign(sign_of(p.x()), sign_of(p.y()), sign_of(p.z()));
      const Vec3 out = q.cwiseMax(0.0);
      if (out.squaredNorm() > 0.0) return (out / out.norm()).cwiseProduct(sign);
      Vec3 g = Vec3::Zero();
      Eigen::Index axis;
      q.maxCoeff(&axis);
      g[axis] = sign[axis];
      return g;
    }
    case ShapeKind::kCylinder: {
      const double rho = std::hypot(p.x(), p.z());
      double gr, gy;
      box2(rho - s.radius, std::abs(p.y()) - s.half_height, gr, gy);
      const Vec3 radial = rho > 0.0 ? Vec3(p.x() / rho, 0, p.z() / rho) : Vec3::UnitX();
      return radial * gr + Vec3::UnitY() * (gy * sign_of(p.y()));
    }
    case ShapeKind::kTorus: {
      const double rho = std::hypot(p.x(), p.z());
      const Vec3 radial = rho > 0.0 ? Vec3(p.x() / rho, 0, p.z() / rho) : Vec3::UnitX();
      const double qx = rho - s.major_radius;
      const double qn = std::hypot(qx, p.y());
      if (qn == 0.0) return radial;
      return radial * (qx / qn) + Vec3::UnitY() * (p.y() / qn);
    }
    case ShapeKind::kCapsule: {
      const double y = std::clamp(p.y(), -s.half_height, s.half_height);
      return safe_unit(p - Vec3(0, y, 0), Vec3::UnitX());
    }
    case ShapeKind::kSuperellipsoid: {
      constexpr double h = 1e-6;
      Vec3 g;
      for (int i = 0; i < 3; ++i) {
        Vec3 a = p, b = p;
        a[i] += h;
        b[i] -= h;
        g[i] = (superellipsoid_sdf(s, a) - superellipsoid_sdf(s, b)) / (2 * h);
      }
      return g;
    }
  }
  throw ConfigError("unknown shape kind");
}

Vec3 analytic_color(const ShapeSpec& s, const Vec3& p) {
  const ColorSpec& c = s.color;
  switch (c.kind) {
    case ColorKind::kSolid:
      return c.primary;
    case ColorKind::kAxisGradient: {
      const double t = std::clamp((p[c.axis] + 1.0) / 2.0, 0.0, 1.0);
      return (1.0 - t) * c.primary + t * c.secondary;
    }
    case ColorKind::kBands: {
      const auto band = static_cast<long>(std::floor((p[c.axis] + 1.0) * c.frequency));
      return band % 2 == 0 ? c.primary : c.secondary;
    }
  }
  return c.primary;
}

double analytic_volume(const ShapeSpec& s) {
  constexpr double pi = std::numbers::pi;
  switch (s.kind) {
    case ShapeKind::kSphere:
      return 4.0 / 3.0 * pi * s.radius * s.radius * s.radius;
    case ShapeKind::kBox:
      return 8.0 * s.half_extents.prod();
    case ShapeKind::kCylinder:
      return pi * s.radius * s.radius * 2.0 * s.half_height;
    case ShapeKind::kTorus:
      return 2.0 * pi * pi * s.major_radius * s.minor_radius * s.minor_radius;
    case ShapeKind::kCapsule:
      return pi * s.radius * s.radius * 2.0 * s.half_height + 4.0 / 3.0 * pi * std::pow(s.radius, 3);
    case ShapeKind::kSuperellipsoid:
      return 2.0 * s.half_extents.prod() * s.e1 * s.e2 * std::beta(s.e1 / 2.0 + 1.0, s.e1) *
             std::beta(s.e2 / 2.0, s.e2 / 2.0);
  }
  return 0.0;
}

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kSphere:
      return "sphere";
    case ShapeKind::kBox:
      return "box";
    case ShapeKind::kCylinder:
      return "cylinder";
    case ShapeKind::kTorus:
      return "torus";
    case ShapeKind::kCapsule:
      return "capsule";
    case ShapeKind::kSuperellipsoid:
      return "superellipsoid";
  }
  return "unknown";
}

ShapeKind parse_shape_kind(const std::string& name) {
  for (auto k : {ShapeKind::kSphere, ShapeKind::kBox, ShapeKind::kCylinder, ShapeKind::kTorus, ShapeKind::kCapsule,
                 ShapeKind::kSuperellipsoid})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown shape kind '" + name + "'");
}

std::vector<ShapeSpec> parse_shape_specs(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("shape spec: ") + e.what());
  }
  if (!root.is_object() || !root.contains("objects") || !root["objects"].is_array())
    throw ConfigError("shape spec: expected an object with an 'objects' array");
  std::vector<ShapeSpec> specs;
  try {
    for (const auto& o : root["objects"]) {
      ShapeSpec s;
      s.kind = parse_shape_kind(o.at("kind").get<std::string>());
      s.name = o.value("name", to_string(s.kind) + "_" + std::to_string(specs.size()));
      s.category = o.value("category", 0);
      s.radius = o.value("radius", s.radius);
      s.half_height = o.value("half_height", s.half_height);
      s.major_radius = o.value("major_radius", s.major_radius);
      s.minor_radius = o.value("minor_radius", s.minor_radius);
      s.half_extents = read_vec3(o, "half_extents", s.half_extents);
      if (o.contains("exponents")) {
        s.e1 = o["exponents"].at(0).get<double>();
        s.e2 = o["exponents"].at(1).get<double>();
      }
      if (o.contains("color")) {
        const auto& c = o["color"];
        s.color.kind = parse_color_kind(c.value("type", "solid"));
        s.color.primary = read_vec3(c, "primary", s.color.primary);
        s.color.secondary = read_vec3(c, "secondary", s.color.primary);
        s.color.axis = c.value("axis", 1);
        s.color.frequency = c.value("frequency", 2.0);
      }
      validate(s);
      specs.push_back(s);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("shape spec: ") + e.what());
  }
  return specs;
}

std::vector<ShapeSpec> load_shape_specs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open shape spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_shape_specs(ss.str());
}

std::string dump_shape_specs(const std::vector<ShapeSpec>& specs) {
  json objects = json::array();
  for (const auto& s : specs) {
    json o = {{"name", s.name}, {"kind", to_string(s.kind)}, {"category", s.category}};
    switch (s.kind) {
      case ShapeKind::kSphere:
        o["radius"] = s.radius;
        break;
      case ShapeKind::kBox:
        o["half_extents"] = vec_json(s.half_extents);
        break;
      case ShapeKind::kCylinder:
      case ShapeKind::kCapsule:
        o["radius"] = s.radius;
        o["half_height"] = s.half_height;
        break;
      case ShapeKind::kTorus:
        o["major_radius"] = s.major_radius;
        o["minor_radius"] = s.minor_radius;
        break;
      case ShapeKind::kSuperellipsoid:
        o["half_extents"] = vec_json(s.half_extents);
        o["exponents"] = json::array({s.e1, s.e2});
        break;
    }
    o["color"] = {{"type", color_kind_name(s.color.kind)},
                  {"primary", vec_json(s.color.primary)},
                  {"secondary", vec_json(s.color.secondary)},
                  {"axis", s.color.axis},
                  {"frequency", s.color.frequency}};
    objects.push_back(o);
  }
  return json{{"objects", objects}}.dump(2);
}

DeskSet desk_set() {
  auto solid = [](Vec3 c) { return ColorSpec{ColorKind::kSolid, c, c}; };
  auto gradient = [](Vec3 a, Vec3 b, int axis) { return ColorSpec{ColorKind::kAxisGradient, a, b, axis}; };
  auto bands = [](Vec3 a, Vec3 b, double f) { return ColorSpec{ColorKind::kBands, a, b, 1, f}; };
  DeskSet d;
  d.categories = {"ball", "box", "can", "capsule"};
  auto add = [](std::vector<ShapeSpec>& out, ShapeSpec s, ColorSpec c, std::string name) {
    out.push_back(s.with_color(c).named(std::move(name)));
  };
  add(d.train, ShapeSpec::sphere(0.28, 0), solid({0.85, 0.2, 0.15}), "ball_0");
  add(d.train, ShapeSpec::sphere(0.34, 0), solid({0.2, 0.6, 0.85}), "ball_1");
  add(d.train, ShapeSpec::sphere(0.40, 0), gradient({0.9, 0.8, 0.2}, {0.3, 0.2, 0.7}, 1), "ball_2");
  add(d.train, ShapeSpec::sphere(0.45, 0), solid({0.3, 0.8, 0.3}), "ball_3");
  add(d.train, ShapeSpec::box({0.30, 0.22, 0.18}, 1), gradient({0.8, 0.5, 0.2}, {0.4, 0.25, 0.1}, 0), "box_0");
  add(d.train, ShapeSpec::box({0.22, 0.32, 0.25}, 1), solid({0.7, 0.7, 0.65}), "box_1");
  add(d.train, ShapeSpec::box({0.36, 0.16, 0.26}, 1), gradient({0.2, 0.3, 0.8}, {0.8, 0.9, 0.95}, 1), "box_2");
  add(d.train, ShapeSpec::box({0.26, 0.26, 0.34}, 1), solid({0.9, 0.45, 0.6}), "box_3");
  add(d.train, ShapeSpec::cylinder(0.20, 0.32, 2), bands({0.9, 0.1, 0.1}, {0.95, 0.95, 0.95}, 2.0), "can_0");
  add(d.train, ShapeSpec::cylinder(0.28, 0.24, 2), solid({0.6, 0.6, 0.7}), "can_1");
  add(d.train, ShapeSpec::cylinder(0.24, 0.40, 2), bands({0.1, 0.4, 0.2}, {0.9, 0.85, 0.3}, 3.0), "can_2");
  add(d.train, ShapeSpec::cylinder(0.32, 0.20, 2), gradient({0.2, 0.2, 0.2}, {0.8, 0.3, 0.1}, 1), "can_3");
  add(d.train, ShapeSpec::capsule(0.16, 0.24, 3), solid({0.95, 0.9, 0.8}), "capsule_0");
  add(d.train, ShapeSpec::capsule(0.20, 0.18, 3), gradient({0.1, 0.5, 0.9}, {0.9, 0.9, 0.9}, 1), "capsule_1");
  add(d.train, ShapeSpec::capsule(0.13, 0.32, 3), solid({0.5, 0.3, 0.2}), "capsule_2");
  add(d.train, ShapeSpec::capsule(0.22, 0.26, 3), bands({0.9, 0.6, 0.1}, {0.3, 0.1, 0.4}, 2.0), "capsule_3");

  add(d.held_out, ShapeSpec::sphere(0.30, 0), solid({0.95, 0.6, 0.1}), "ball_held");
  add(d.held_out, ShapeSpec::box({0.28, 0.20, 0.30}, 1), gradient({0.6, 0.2, 0.6}, {0.9, 0.8, 0.5}, 2), "box_held");
  add(d.held_out, ShapeSpec::cylinder(0.21, 0.36, 2), bands({0.2, 0.2, 0.8}, {0.9, 0.9, 0.2}, 2.0), "can_held");
  add(d.held_out, ShapeSpec::capsule(0.21, 0.16, 3), solid({0.2, 0.75, 0.6}), "capsule_held");
  add(d.held_out, ShapeSpec::box({0.32, 0.26, 0.20}, 1), solid({0.15, 0.5, 0.3}), "box_held_2");
  return d;
}

}  // namespace osdf
