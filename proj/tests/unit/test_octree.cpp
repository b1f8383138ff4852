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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "osdf/octree.hpp"
#include "osdf/ply.hpp"
#include "test_util.hpp"

namespace osdf {
namespace {

std::vector<ShapeSpec> exact_oracles() {
  return {ShapeSpec::sphere(0.8), ShapeSpec::box({0.5, 0.3, 0.6}), ShapeSpec::torus(0.55, 0.2),
          ShapeSpec::capsule(0.25, 0.4), ShapeSpec::cylinder(0.4, 0.35)};
}

class ConstantSdf final : public SdfField {
 public:
  explicit ConstantSdf(double v) : v_(v) {}
  void evaluate(std::span<const Vec3>, std::span<double> values) const override {
    std::fill(values.begin(), values.end(), v_);
  }
  void evaluate_with_gradient(std::span<const Vec3>, std::span<double> values, std::span<Vec3> grads) const override {
    std::fill(values.begin(), values.end(), v_);
    std::fill(grads.begin(), grads.end(), Vec3::Zero());
  }

 private:
  double v_;
};

TEST(CellSize, Examples) {
  EXPECT_EQ(cell_size(3), 0.25);
  EXPECT_EQ(cell_size(6), 0.03125);
  EXPECT_EQ(cell_size(0), 2.0);
  EXPECT_THROW(cell_size(-1), ConfigError);
  EXPECT_EQ(cell_center({1, {0, 1, 1}}), Vec3(-0.5, 0.5, 0.5));
}

TEST(Octree, UnitSphereProjectionIsExact) {
  const AnalyticSdf sphere(ShapeSpec::sphere(1.0));
  const auto ex = extract_octree(sphere, nullptr, {3, 6});
  ASSERT_GT(ex.cloud.size(), 0u);
  for (const Vec3& p : ex.cloud.points) EXPECT_LT(std::abs(p.norm() - 1.0), 1e-9);
}

TEST(Octree, FinalLevelMatchesBruteForceLattice) {
  for (const auto& spec : exact_oracles()) {
    const AnalyticSdf field(spec);
    for (int lod_end : {4, 5}) {
      OctreeOptions o{3, lod_end};
      o.keep_levels = true;
      const auto ex = extract_octree(field, nullptr, o);
      auto octree_cells = ex.levels.back().cells;
      auto brute = dense_occupied_cells(field, lod_end);
      std::sort(octree_cells.begin(), octree_cells.end());
      std::sort(brute.begin(), brute.end());
      EXPECT_EQ(octree_cells, brute) << to_string(spec.kind) << " lod " << lod_end;
    }
  }
}

TEST(Octree, SphereR08MatchesIndependentEnumeration) {
  // Enumerate all 32^3 cells with a closed-form predicate, sharing no code.
  const double r = 0.8, c = 2.0 / 32, thr = std::sqrt(3.0) / 2 * c;
  std::set<std::array<int, 3>> expected;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j)
      for (int k = 0; k < 32; ++k) {
        const Vec3 x(-1 + (i + 0.5) * c, -1 + (j + 0.5) * c, -1 + (k + 0.5) * c);
        if (std::abs(x.norm() - r) < thr) expected.insert({i, j, k});
      }
  OctreeOptions o{3, 5};
  o.keep_levels = true;
  const auto ex = extract_octree(AnalyticSdf(ShapeSpec::sphere(r)), nullptr, o);
  std::set<std::array<int, 3>> got;
  for (const auto& cell : ex.levels.back().cells) got.insert(cell.ijk);
  EXPECT_EQ(got, expected);
  EXPECT_EQ(ex.cloud.size(), expected.size());
}

TEST(Octree, SoundnessAndCloudInvariants) {
  for (const auto& spec : exact_oracles()) {
    const AnalyticSdf field(spec);
    OctreeOptions o{3, 6};
    o.keep_levels = true;
    const auto ex = extract_octree(field, nullptr, o);
    ASSERT_EQ(ex.levels.size(), 4u);
    for (std::size_t l = 0; l < ex.levels.size(); ++l) {
      const auto& level = ex.levels[l];
      EXPECT_EQ(level.lod, 3 + static_cast<int>(l));
      EXPECT_EQ(level.cell_size, cell_size(level.lod));
      for (std::size_t i = 0; i < level.cells.size(); ++i) {
        EXPECT_EQ(level.centers[i], cell_center(level.cells[i]));
        EXPECT_LT(std::abs(analytic_sdf(spec, level.centers[i])), kOccupancyKappa * level.cell_size);
      }
    }
    const auto& cloud = ex.cloud;
    EXPECT_EQ(cloud.points.size(), cloud.normals.size());
    EXPECT_EQ(cloud.points.size(), cloud.sdf.size());
    EXPECT_FALSE(cloud.has_colors());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      EXPECT_NEAR(cloud.normals[i].norm(), 1.0, 1e-6);
      EXPECT_LT(std::abs(cloud.sdf[i]), kOccupancyKappa * cell_size(6));
      EXPECT_LT(std::abs(analytic_sdf(spec, cloud.points[i])), 1e-9) << to_string(spec.kind);
    }
    EXPECT_EQ(ex.report.output_points, cloud.size());
    EXPECT_LE(ex.report.output_points, ex.report.input_points);
  }
}

TEST(Octree, InputCountBelowDenseGridAtEqualResolution) {
  for (const auto& spec : exact_oracles()) {
    const AnalyticSdf field(spec);
    for (int lod : {4, 5, 6}) {
      const auto ex = extract_octree(field, nullptr, {3, lod});
      const std::size_t dense = std::size_t{1} << (3 * lod);
      EXPECT_LT(ex.report.input_points, dense) << to_string(spec.kind);
    }
  }
}

TEST(Octree, NormalsPointOutwardOnStarShapedPrimitives) {
  for (const auto& spec : {ShapeSpec::sphere(0.6), ShapeSpec::box({0.5, 0.3, 0.6}), ShapeSpec::capsule(0.25, 0.4),
                           ShapeSpec::cylinder(0.4, 0.35)}) {
    const auto ex = extract_octree(AnalyticSdf(spec), nullptr, {3, 6});
    for (std::size_t i = 0; i < ex.cloud.size(); ++i) EXPECT_GT(ex.cloud.normals[i].dot(ex.cloud.points[i]), 0.0);
  }
}

TEST(Octree, CoarseRunHasFewerPoints) {
  const AnalyticSdf field(ShapeSpec::sphere(0.5));
  const auto coarse = extract_octree(field, nullptr, {3, 3});
  const auto fine = extract_octree(field, nullptr, {3, 6});
  EXPECT_LT(coarse.cloud.size(), fine.cloud.size());
}

TEST(Octree, ColorsFromColorField) {
  auto spec = ShapeSpec::sphere(0.5);
  spec.color = {ColorKind::kAxisGradient, {0, 0, 0}, {1, 1, 1}, 1};
  const AnalyticColor color(spec);
  const auto ex = extract_octree(AnalyticSdf(spec), &color, {3, 5});
  ASSERT_TRUE(ex.cloud.has_colors());
  for (std::size_t i = 0; i < ex.cloud.size(); ++i)
    EXPECT_LT((ex.cloud.colors[i] - analytic_color(spec, ex.cloud.points[i])).norm(), 1e-12);
}

TEST(Octree, EmptySurfaceAndBadOptions) {
  const ConstantSdf far(5.0);
  EXPECT_THROW(extract_octree(far, nullptr, {3, 6}), EmptySurfaceError);
  EXPECT_THROW(extract_grid(far, nullptr, 20), EmptySurfaceError);
  const AnalyticSdf field(ShapeSpec::sphere(0.5));
  EXPECT_THROW(extract_octree(field, nullptr, {5, 4}), ConfigError);
  EXPECT_THROW(extract_grid(field, nullptr, 1), ConfigError);
}

TEST(Octree, ZeroGradientPointsAreDroppedAndCounted) {
  // Zero crossing everywhere, gradient zero everywhere.
  const ConstantSdf flat(0.0);
  const auto ex = extract_octree(flat, nullptr, {1, 2});
  EXPECT_EQ(ex.cloud.size(), 0u);
  EXPECT_EQ(ex.report.dropped_points, 64u);
}

TEST(Grid, InputCountAndExactness) {
  const AnalyticSdf field(ShapeSpec::sphere(0.7));
  const auto ex = extract_grid(field, nullptr, 60);
  EXPECT_EQ(ex.report.input_points, 216000u);
  ASSERT_GT(ex.cloud.size(), 0u);
  for (std::size_t i = 0; i < ex.cloud.size(); ++i) {
    EXPECT_LT(std::abs(ex.cloud.points[i].norm() - 0.7), 1e-9);
    EXPECT_LE(std::abs(ex.cloud.sdf[i]), kGridBand);
  }
  EXPECT_EQ(ex.report.grid_type, GridType::kOrdinary);
}

TEST(Projection, Examples) {
  const std::vector<Vec3> x{{2, 0, 0}, {0.3, 0.1, -0.2}};
  const std::vector<double> s{1.0, 0.0};
  const std::vector<Vec3> g{{1, 0, 0}, {0, 2, 0}};
  const auto p = project_points(x, s, g);
  ASSERT_EQ(p.points.size(), 2u);
  EXPECT_EQ(p.points[0], Vec3(1, 0, 0));
  EXPECT_EQ(p.points[1], x[1]);
  EXPECT_EQ(p.normals[1], Vec3(0, 1, 0));
  const std::vector<Vec3> zero{{0, 0, 0}, {0, 1e-9, 0}};
  const auto d = project_points(x, s, zero);
  EXPECT_EQ(d.dropped, 2u);
  EXPECT_TRUE(d.points.empty());
  EXPECT_THROW(project_points(x, std::vector<double>{1.0}, g), ConfigError);
}

TEST(Projection, RandomSpherePointsAndIdempotence) {
  std::mt19937_64 rng(1);
  const auto pts = test::random_points(1000, rng);
  const ShapeSpec sphere = ShapeSpec::sphere(0.6);
  std::vector<double> s;
  std::vector<Vec3> g;
  for (const auto& p : pts) {
    s.push_back(analytic_sdf(sphere, p));
    g.push_back(3.0 * analytic_sdf_gradient(sphere, p));  // unnormalized on purpose
  }
  const auto proj = project_points(pts, s, g);
  for (const auto& p : proj.points) EXPECT_LT(std::abs(p.norm() - 0.6), 1e-12);

  for (const auto& spec : exact_oracles()) {
    for (const auto& p0 : test::random_points(200, rng)) {
      const Vec3 p1 = p0 - analytic_sdf_gradient(spec, p0) * analytic_sdf(spec, p0);
      const Vec3 p2 = p1 - analytic_sdf_gradient(spec, p1) * analytic_sdf(spec, p1);
      // The medial axis of a box is a measure-zero set where one step may
      // land on a different face; everywhere else one step is exact.
      if (std::abs(analytic_sdf(spec, p1)) > 1e-9) continue;
      EXPECT_LT((p2 - p1).norm(), 1e-9) << to_string(spec.kind);
    }
  }
}

TEST(Projection, VjpMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const Vec3 x = test::random_points(1, rng)[0];
    const Vec3 g = test::random_points(1, rng)[0] + Vec3(0.1, 0, 0);
    const double s = 0.3 * (t % 7 - 3) / 3.0;
    const Vec3 cot = test::random_points(1, rng)[0];
    auto loss = [&](double ss, const Vec3& gg) { return cot.dot(x - gg.normalized() * ss); };
    double ds = 0;
    Vec3 dg;
    project_point_vjp(g, s, cot, ds, dg);
    const double h = 1e-6;
    EXPECT_NEAR(ds, (loss(s + h, g) - loss(s - h, g)) / (2 * h), 1e-8);
    for (int k = 0; k < 3; ++k) {
      Vec3 a = g, b = g;
      a[k] += h;
      b[k] -= h;
      EXPECT_NEAR(dg[k], (loss(s, a) - loss(s, b)) / (2 * h), 1e-7);
    }
  }
}

TEST(NetworkField, MatchesNetworkEvaluation) {
  std::mt19937_64 rng(3);
  const auto net = make_sdf_network({2, 32, 30.0}, 4, rng);
  const VectorX<float> code = VectorX<float>::Constant(4, 0.1f);
  const NetworkSdf field(net, code);
  const auto pts = test::random_points(33, rng);
  std::vector<double> v(33), v2(33);
  std::vector<Vec3> g(33);
  field.evaluate(pts, v);
  field.evaluate_with_gradient(pts, v2, g);
  const LatentCode lc{code, {}, 0};
  const auto out = forward(net, lc, pts);
  const auto grads = input_gradient(net, lc, pts);
  for (int i = 0; i < 33; ++i) {
    EXPECT_NEAR(v[static_cast<std::size_t>(i)], out(0, i), 1e-6);
    EXPECT_NEAR(v2[static_cast<std::size_t>(i)], out(0, i), 1e-6);
    EXPECT_LT((g[static_cast<std::size_t>(i)] - grads[static_cast<std::size_t>(i)]).norm(), 1e-5);
  }
  EXPECT_GE(field.live_values_per_point(), static_cast<std::size_t>(net.max_width()));
}

TEST(Benchmark, RowsCountsAndCsv) {
  const AnalyticSdf field(ShapeSpec::sphere(0.5));
  const auto configs = default_benchmark_configurations();
  ASSERT_EQ(configs.size(), 6u);
  const auto a = benchmark_sampling(field, nullptr, configs);
  const auto b = benchmark_sampling(field, nullptr, configs);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].input_points, b[i].input_points);
    EXPECT_EQ(a[i].output_points, b[i].output_points);
    EXPECT_EQ(sampling_csv_row(a[i], false), sampling_csv_row(b[i], false));
    EXPECT_LE(a[i].output_points, a[i].input_points);
  }
  EXPECT_EQ(a[2].input_points, 216000u);
  EXPECT_EQ(sampling_csv_header(), "grid_type,resolution,input_points,output_points,time_s,peak_values");
  EXPECT_EQ(sampling_csv_row(a[0], false).substr(0, 12), "ordinary,40,");
  EXPECT_NE(sampling_csv_row(a[4], false).find(",,"), std::string::npos);
  // Octree LoD6 against the 64^3 lattice. The count scales with surface
  // area; r = 0.3 is the size of a typical desk object.
  const auto lod6 = extract_octree(AnalyticSdf(ShapeSpec::sphere(0.3)), nullptr, {3, 6});
  EXPECT_LT(static_cast<double>(lod6.report.input_points), 0.05 * 64 * 64 * 64);
}

TEST(Ply, RoundTripBothFormats) {
  std::mt19937_64 rng(4);
  PointCloud cloud;
  cloud.points = test::random_points(50, rng);
  for (const auto& p : cloud.points) cloud.normals.push_back(p.normalized());
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 50; ++i) cloud.colors.emplace_back(u(rng), u(rng), u(rng));
  for (auto fmt : {PlyFormat::kAscii, PlyFormat::kBinaryLittleEndian}) {
    const auto bytes = encode_ply(cloud, fmt);
    const auto back = decode_ply(bytes);
    ASSERT_EQ(back.points.size(), 50u);
    ASSERT_EQ(back.normals.size(), 50u);
    ASSERT_EQ(back.colors.size(), 50u);
    for (int i = 0; i < 50; ++i) {
      EXPECT_LT((back.points[i] - cloud.points[i]).norm(), 1e-6);
      EXPECT_LT((back.normals[i] - cloud.normals[i]).norm(), 1e-6);
      for (int k = 0; k < 3; ++k) EXPECT_EQ(color_to_u8(back.colors[i][k]), color_to_u8(cloud.colors[i][k]));
    }
    EXPECT_EQ(encode_ply(back, fmt), bytes);
  }
  const auto path = test::temp_dir("ply") / "c.ply";
  write_ply(path, cloud);
  EXPECT_EQ(read_ply(path).points.size(), 50u);
}

TEST(Ply, HeaderLayout) {
  PointCloud cloud;
  cloud.points = {Vec3(1, 2, 3)};
  const auto text = encode_ply(cloud, PlyFormat::kAscii);
  EXPECT_EQ(text,
            "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\n"
            "property float nx\nproperty float ny\nproperty float nz\nproperty uchar red\nproperty uchar green\n"
            "property uchar blue\nend_header\n1 2 3 0 0 0 0 0 0\n");
  const auto bin = encode_ply(cloud, PlyFormat::kBinaryLittleEndian);
  EXPECT_EQ(bin.size(), bin.find("end_header\n") + 11 + 27);
}

TEST(Ply, ForeignLayoutsAndErrors) {
  const std::string xyz_only =
      "ply\nformat ascii 1.0\ncomment test\nelement vertex 2\nproperty double x\nproperty double y\n"
      "property double z\nelement face 0\nproperty list uchar int vertex_indices\nend_header\n0 0 1\n0.5 0.25 0\n";
  const auto c = decode_ply(xyz_only);
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_TRUE(c.normals.empty());
  EXPECT_TRUE(c.colors.empty());
  EXPECT_EQ(c.points[1], Vec3(0.5, 0.25, 0));
  EXPECT_THROW(decode_ply("not a ply"), FormatError);
  EXPECT_THROW(decode_ply("ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\n"
                          "property float z\nend_header\n1 2 3\n"),
               FormatError);
  PointCloud cloud;
  cloud.points = {Vec3(1, 2, 3)};
  auto bin = encode_ply(cloud, PlyFormat::kBinaryLittleEndian);
  bin.pop_back();
  EXPECT_THROW(decode_ply(bin), FormatError);
  EXPECT_THROW(read_ply("/nonexistent/x.ply"), Error);
  cloud.normals = {Vec3(0, 0, 1), Vec3(0, 0, 1)};
  EXPECT_THROW(encode_ply(cloud, PlyFormat::kAscii), ConfigError);
  EXPECT_EQ(color_to_u8(1.5), 255);
  EXPECT_EQ(color_to_u8(-0.2), 0);
  EXPECT_EQ(color_to_u8(0.5), 128);
}

}  // namespace
}  // namespace osdf
