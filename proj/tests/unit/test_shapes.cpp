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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "osdf/chamfer.hpp"
#include "osdf/shapes.hpp"
#include "test_util.hpp"

namespace osdf {
namespace {

TEST(AnalyticSdf, SpecExamples) {
  const auto sphere = ShapeSpec::sphere(0.5);
  EXPECT_DOUBLE_EQ(analytic_sdf(sphere, {1, 0, 0}), 0.5);
  EXPECT_DOUBLE_EQ(analytic_sdf(sphere, {0, 0, 0}), -0.5);
  const auto box = ShapeSpec::box({0.5, 0.5, 0.5});
  EXPECT_NEAR(analytic_sdf(box, {1, 1, 1}), std::sqrt(0.75), 1e-15);
  EXPECT_NEAR(analytic_sdf(box, {0, 0, 0}), -0.5, 1e-15);
  EXPECT_NEAR(analytic_sdf(box, {0.2, 0.45, 0.1}), -0.05, 1e-15);
}

TEST(AnalyticSdf, HandValuesPerKind) {
  const auto cyl = ShapeSpec::cylinder(0.3, 0.4);
  EXPECT_NEAR(analytic_sdf(cyl, {0.5, 0, 0}), 0.2, 1e-15);
  EXPECT_NEAR(analytic_sdf(cyl, {0, 0.7, 0}), 0.3, 1e-15);
  EXPECT_NEAR(analytic_sdf(cyl, {0.6, 0.8, 0}), std::hypot(0.3, 0.4), 1e-15);
  EXPECT_NEAR(analytic_sdf(cyl, {0, 0, 0}), -0.3, 1e-15);
  const auto torus = ShapeSpec::torus(0.6, 0.2);
  EXPECT_NEAR(analytic_sdf(torus, {0.6, 0, 0}), -0.2, 1e-15);
  EXPECT_NEAR(analytic_sdf(torus, {0, 0, 0}), 0.4, 1e-15);
  EXPECT_NEAR(analytic_sdf(torus, {0, 0.5, 0.6}), 0.3, 1e-15);
  const auto cap = ShapeSpec::capsule(0.2, 0.3);
  EXPECT_NEAR(analytic_sdf(cap, {0, 0.9, 0}), 0.4, 1e-15);
  EXPECT_NEAR(analytic_sdf(cap, {0.5, 0.1, 0}), 0.3, 1e-15);
  EXPECT_NEAR(analytic_sdf(cap, {0, 0, 0}), -0.2, 1e-15);
}

// Dense surface samples of each primitive give a distance oracle that does
// not share code with analytic_sdf.
std::vector<Vec3> surface_samples(const ShapeSpec& s, int n) {
  std::vector<Vec3> out;
  const double pi = std::numbers::pi;
  auto push_rev = [&](auto profile, int m) {
    // Surface of revolution about y from a profile (r(t), y(t)), t in [0,1].
    for (int i = 0; i <= m; ++i) {
      const auto [r, y] = profile(static_cast<double>(i) / m);
      const int around = std::max(1, static_cast<int>(std::ceil(2 * pi * r * m)));
      for (int j = 0; j < around; ++j) {
        const double a = 2 * pi * j / around;
        out.emplace_back(r * std::cos(a), y, r * std::sin(a));
      }
    }
  };
  switch (s.kind) {
    case ShapeKind::kSphere:
      push_rev([&](double t) { return std::pair{s.radius * std::sin(pi * t), -s.radius * std::cos(pi * t)}; }, n);
      break;
    case ShapeKind::kCapsule: {
      const double arc = pi * s.radius, side = 2 * s.half_height, total = arc + side;
      push_rev(
          [&](double t) {
            const double u = t * total;
            if (u < arc / 2) {
              const double a = u / s.radius;
              return std::pair{s.radius * std::sin(a), -s.half_height - s.radius * std::cos(a)};
            }
            if (u < arc / 2 + side) return std::pair{s.radius, -s.half_height + (u - arc / 2)};
            const double a = (u - arc / 2 - side) / s.radius;
            return std::pair{s.radius * std::cos(a), s.half_height + s.radius * std::sin(a)};
          },
          n);
      break;
    }
    case ShapeKind::kCylinder: {
      const double total = 2 * s.radius + 2 * s.half_height;
      push_rev(
          [&](double t) {
            const double u = t * total;
            if (u < s.radius) return std::pair{u, -s.half_height};
            if (u < s.radius + 2 * s.half_height) return std::pair{s.radius, -s.half_height + (u - s.radius)};
            return std::pair{total - u, s.half_height};
          },
          n);
      break;
    }
    case ShapeKind::kTorus:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double a = 2 * pi * i / n, b = 2 * pi * j / n;
          const double r = s.major_radius + s.minor_radius * std::cos(b);
          out.emplace_back(r * std::cos(a), s.minor_radius * std::sin(b), r * std::sin(a));
        }
      break;
    case ShapeKind::kBox: {
      const Vec3 h = s.half_extents;
      for (int f = 0; f < 6; ++f) {
        const int ax = f / 2, u = (ax + 1) % 3, v = (ax + 2) % 3;
        for (int i = 0; i <= n; ++i)
          for (int j = 0; j <= n; ++j) {
            Vec3 p;
            p[ax] = f % 2 ? h[ax] : -h[ax];
            p[u] = -h[u] + 2 * h[u] * i / n;
            p[v] = -h[v] + 2 * h[v] * j / n;
            out.push_back(p);
          }
      }
      break;
    }
    case ShapeKind::kSuperellipsoid:
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j < 2 * n; ++j) {
          const double eta = -pi / 2 + pi * i / n, om = -pi + pi * j / n;
          auto sp = [](double c, double e) { return std::copysign(std::pow(std::abs(c), e), c); };
          const double ce = sp(std::cos(eta), s.e1);
          out.emplace_back(s.half_extents.x() * ce * sp(std::cos(om), s.e2), s.half_extents.y() * sp(std::sin(eta), s.e1),
                           s.half_extents.z() * ce * sp(std::sin(om), s.e2));
        }
      break;
  }
  return out;
}

// Samples lie exactly on the surface, so their nearest distance bounds the
// true distance from above; the gap shrinks with the sample spacing.
TEST(AnalyticSdf, MagnitudeMatchesSurfaceSampleOracle) {
  const std::vector<ShapeSpec> cases{ShapeSpec::sphere(0.6), ShapeSpec::box({0.5, 0.3, 0.4}),
                                     ShapeSpec::cylinder(0.35, 0.5), ShapeSpec::torus(0.55, 0.2),
                                     ShapeSpec::capsule(0.25, 0.4)};
  std::mt19937_64 rng(1);
  for (const auto& spec : cases) {
    const auto samples = surface_samples(spec, 500);
    const KdTree tree(samples);
    int compared = 0;
    for (const Vec3& p : test::random_points(400, rng, 0.95)) {
      double sq = 0;
      tree.nearest(p, &sq);
      const double s = std::abs(analytic_sdf(spec, p));
      EXPECT_LE(s, std::sqrt(sq) + 1e-12) << to_string(spec.kind);
      if (s > 0.05) {
        EXPECT_NEAR(s, std::sqrt(sq), 1e-3) << to_string(spec.kind);
        ++compared;
      }
    }
    EXPECT_GT(compared, 100);
  }
}

Vec3 superellipsoid_point(const ShapeSpec& s, double eta, double om) {
  auto sp = [](double c, double e) { return std::copysign(std::pow(std::abs(c), e), c); };
  const double ce = sp(std::cos(eta), s.e1);
  return {s.half_extents.x() * ce * sp(std::cos(om), s.e2), s.half_extents.y() * sp(std::sin(eta), s.e1),
          s.half_extents.z() * ce * sp(std::sin(om), s.e2)};
}

// Distance to the parametric surface by coarse search plus shrinking local
// grid refinement in parameter space.
double superellipsoid_distance(const ShapeSpec& s, const Vec3& p) {
  const double pi = std::numbers::pi;
  double best = 1e300, be = 0, bo = 0;
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; j < 400; ++j) {
      const double eta = -pi / 2 + pi * i / 200, om = -pi + pi * j / 200;
      const double d = (superellipsoid_point(s, eta, om) - p).squaredNorm();
      if (d < best) best = d, be = eta, bo = om;
    }
  double window = pi / 100;
  for (int round = 0; round < 30; ++round) {
    const double ce = be, co = bo;
    for (int i = -10; i <= 10; ++i)
      for (int j = -10; j <= 10; ++j) {
        const double eta = std::clamp(ce + window * i / 10, -pi / 2, pi / 2), om = co + window * j / 10;
        const double d = (superellipsoid_point(s, eta, om) - p).squaredNorm();
        if (d < best) best = d, be = eta, bo = om;
      }
    window *= 0.5;
  }
  return std::sqrt(best);
}

TEST(AnalyticSdf, SuperellipsoidBoundedNearSurface) {
  const auto se = ShapeSpec::superellipsoid({0.5, 0.4, 0.45}, 0.8, 1.2);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1), offset(-0.02, 0.02);
  for (int k = 0; k < 60; ++k) {
    const Vec3 q = superellipsoid_point(se, u(rng) * 1.5, u(rng) * 3.1);
    const Vec3 n = analytic_sdf_gradient(se, q).normalized();
    const double d = offset(rng);
    const Vec3 p = q + d * n;
    const double s = analytic_sdf(se, p);
    EXPECT_NEAR(std::abs(s), superellipsoid_distance(se, p), 1e-3);
    if (std::abs(d) > 1e-4) EXPECT_EQ(s > 0, d > 0);
  }
}

TEST(AnalyticSdf, SuperellipsoidReducesToSphere) {
  const auto se = ShapeSpec::superellipsoid({0.5, 0.5, 0.5}, 1.0, 1.0);
  std::mt19937_64 rng(3);
  for (const Vec3& p : test::random_points(100, rng)) EXPECT_NEAR(analytic_sdf(se, p), p.norm() - 0.5, 1e-6);
}

TEST(AnalyticSdf, SignMatchesInsideOutsideFunction) {
  const auto se = ShapeSpec::superellipsoid({0.6, 0.4, 0.5}, 0.5, 1.5);
  std::mt19937_64 rng(4);
  for (const Vec3& p : test::random_points(2000, rng)) {
    const double xz = std::pow(std::abs(p.x() / 0.6), 2.0 / 1.5) + std::pow(std::abs(p.z() / 0.5), 2.0 / 1.5);
    const double f = std::pow(xz, 1.5 / 0.5) + std::pow(std::abs(p.y() / 0.4), 2.0 / 0.5);
    if (std::abs(f - 1.0) < 1e-9) continue;
    EXPECT_EQ(analytic_sdf(se, p) < 0, f < 1.0);
  }
}

TEST(AnalyticSdf, GradientIsUnitAndMatchesDifferences) {
  std::mt19937_64 rng(5);
  for (const auto& s : {ShapeSpec::sphere(0.5), ShapeSpec::box({0.4, 0.3, 0.5}), ShapeSpec::cylinder(0.3, 0.4),
                        ShapeSpec::torus(0.5, 0.2), ShapeSpec::capsule(0.2, 0.3)}) {
    for (const Vec3& p : test::random_points(200, rng)) {
      const Vec3 g = analytic_sdf_gradient(s, p);
      EXPECT_NEAR(g.norm(), 1.0, 1e-9);
      const double h = 1e-7;
      Vec3 fd;
      for (int k = 0; k < 3; ++k) {
        Vec3 a = p, b = p;
        a[k] += h;
        b[k] -= h;
        fd[k] = (analytic_sdf(s, a) - analytic_sdf(s, b)) / (2 * h);
      }
      // Skip the measure-zero medial set where the SDF is not differentiable.
      if (std::abs(fd.norm() - 1.0) > 1e-4) continue;
      EXPECT_LT((fd - g).norm(), 1e-5) << to_string(s.kind);
    }
  }
}

TEST(AnalyticSdf, OneLipschitz) {
  std::mt19937_64 rng(6);
  const auto s = ShapeSpec::torus(0.5, 0.25);
  const auto a = test::random_points(500, rng), b = test::random_points(500, rng);
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_LE(std::abs(analytic_sdf(s, a[i]) - analytic_sdf(s, b[i])), (a[i] - b[i]).norm() + 1e-12);
}

TEST(AnalyticColor, Functions) {
  ShapeSpec s = ShapeSpec::sphere(0.5);
  s.color = {ColorKind::kAxisGradient, {0, 0, 0}, {1, 0.5, 0}, 1};
  EXPECT_LT((analytic_color(s, {0, -1, 0}) - Vec3(0, 0, 0)).norm(), 1e-15);
  EXPECT_LT((analytic_color(s, {0, 1, 0}) - Vec3(1, 0.5, 0)).norm(), 1e-15);
  EXPECT_LT((analytic_color(s, {0, 0, 0}) - Vec3(0.5, 0.25, 0)).norm(), 1e-15);
  s.color = {ColorKind::kBands, {1, 0, 0}, {0, 0, 1}, 0, 2.0};
  EXPECT_EQ(analytic_color(s, {-0.9, 0, 0}), Vec3(1, 0, 0));
  EXPECT_EQ(analytic_color(s, {-0.4, 0, 0}), Vec3(0, 0, 1));
  EXPECT_EQ(analytic_color(s, {0.1, 0, 0}), Vec3(1, 0, 0));
}

TEST(ShapeSpecs, ValidationRejectsBadParameters) {
  EXPECT_THROW(validate(ShapeSpec::sphere(-0.1)), ConfigError);
  EXPECT_THROW(validate(ShapeSpec::sphere(1.5)), ConfigError);
  EXPECT_THROW(validate(ShapeSpec::torus(0.2, 0.3)), ConfigError);
  EXPECT_THROW(validate(ShapeSpec::capsule(0.5, 0.6)), ConfigError);
  ShapeSpec c = ShapeSpec::sphere(0.5);
  c.color.primary = {1.2, 0, 0};
  EXPECT_THROW(validate(c), ConfigError);
  EXPECT_THROW(parse_shape_kind("cone"), ConfigError);
}

TEST(ShapeSpecs, JsonRoundTrip) {
  const auto desk = desk_set();
  const auto text = dump_shape_specs(desk.train);
  const auto back = parse_shape_specs(text);
  ASSERT_EQ(back.size(), desk.train.size());
  EXPECT_EQ(dump_shape_specs(back), text);
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].name, desk.train[i].name);
    EXPECT_EQ(back[i].category, desk.train[i].category);
    EXPECT_DOUBLE_EQ(analytic_sdf(back[i], {0.1, 0.2, 0.3}), analytic_sdf(desk.train[i], {0.1, 0.2, 0.3}));
  }
}

TEST(ShapeSpecs, ParseErrors) {
  EXPECT_THROW(parse_shape_specs("not json"), ConfigError);
  EXPECT_THROW(parse_shape_specs(R"({"things": []})"), ConfigError);
  EXPECT_THROW(parse_shape_specs(R"({"objects": [{"kind": "blob"}]})"), ConfigError);
  EXPECT_THROW(parse_shape_specs(R"({"objects": [{"kind": "box", "half_extents": [1, 2]}]})"), ConfigError);
  EXPECT_THROW(load_shape_specs("/nonexistent/specs.json"), ConfigError);
  const auto one = parse_shape_specs(R"({"objects": [{"kind": "sphere", "radius": 0.4,
      "color": {"type": "bands", "primary": [1, 0, 0], "secondary": [0, 1, 0], "axis": 2, "frequency": 3}}]})");
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].color.kind, ColorKind::kBands);
  EXPECT_EQ(one[0].color.axis, 2);
}

TEST(DeskSet, CategoriesAndFit) {
  const auto d = desk_set();
  EXPECT_EQ(d.categories.size(), 4u);
  EXPECT_EQ(d.train.size(), 16u);
  EXPECT_GE(d.held_out.size(), 4u);
  std::vector<int> count(4, 0);
  for (const auto& s : d.train) {
    validate(s);
    ++count[s.category];
    // Bounding cube corners are outside every object.
    EXPECT_GT(analytic_sdf(s, {1, 1, 1}), 0.0);
    EXPECT_LT(analytic_sdf(s, {0, 0, 0}), 0.0);
  }
  for (int c : count) EXPECT_EQ(c, 4);
  for (const auto& s : d.held_out) validate(s);
}

}  // namespace
}  // namespace osdf
