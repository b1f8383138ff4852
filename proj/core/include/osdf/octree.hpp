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

// Coarse-to-fine narrow-band surface extraction over [-1,1]^3 and the dense
// grid baseline it is compared against.

#include <array>
#include <cmath>
#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "osdf/common.hpp"
#include "osdf/field_net.hpp"
#include "osdf/shapes.hpp"

namespace osdf {

// Half cell diagonal, in units of the cell edge.
inline const double kOccupancyKappa = std::sqrt(3.0) / 2.0;
inline constexpr double kGridBand = 0.03;

class SdfField {
 public:
  virtual ~SdfField() = default;
  virtual void evaluate(std::span<const Vec3> points, std::span<double> values) const = 0;
  virtual void evaluate_with_gradient(std::span<const Vec3> points, std::span<double> values,
                                      std::span<Vec3> gradients) const = 0;
  // Scalars held per point during one evaluation (memory proxy).
  virtual std::size_t live_values_per_point() const { return 4; }
};

class ColorField {
 public:
  virtual ~ColorField() = default;
  virtual void evaluate(std::span<const Vec3> points, std::span<Vec3> colors) const = 0;
};

class AnalyticSdf final : public SdfField {
 public:
  explicit AnalyticSdf(ShapeSpec spec) : spec_(std::move(spec)) { validate(spec_); }
  void evaluate(std::span<const Vec3> points, std::span<double> values) const override;
  void evaluate_with_gradient(std::span<const Vec3> points, std::span<double> values,
                              std::span<Vec3> gradients) const override;
  const ShapeSpec& spec() const { return spec_; }

 private:
  ShapeSpec spec_;
};

class AnalyticColor final : public ColorField {
 public:
  explicit AnalyticColor(ShapeSpec spec) : spec_(std::move(spec)) {}
  void evaluate(std::span<const Vec3> points, std::span<Vec3> colors) const override;

 private:
  ShapeSpec spec_;
};

// SDF network bound to one shape code. Holds references; the network must
// outlive the field.
class NetworkSdf final : public SdfField {
 public:
  NetworkSdf(const FieldNetwork& net, VectorX<float> shape_code);
  void evaluate(std::span<const Vec3> points, std::span<double> values) const override;
  void evaluate_with_gradient(std::span<const Vec3> points, std::span<double> values,
                              std::span<Vec3> gradients) const override;
  std::size_t live_values_per_point() const override;
  const FieldNetwork& network() const { return net_; }
  const VectorX<float>& code() const { return code_; }

 private:
  const FieldNetwork& net_;
  VectorX<float> code_;
};

class NetworkColor final : public ColorField {
 public:
  NetworkColor(const FieldNetwork& net, VectorX<float> shape_code, VectorX<float> texture_code);
  void evaluate(std::span<const Vec3> points, std::span<Vec3> colors) const override;

 private:
  const FieldNetwork& net_;
  VectorX<float> tail_;
};

struct SurfacePointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<Vec3> colors;  // empty when no color field was given
  std::vector<double> sdf;   // value at the source point before projection
  std::vector<Vec3> sources; // query point each surface point was projected from
  std::vector<double> gradient_norms;

  std::size_t size() const { return points.size(); }
  bool has_colors() const { return !colors.empty(); }
};

enum class GridType { kOrdinary, kOctree };

struct SamplingReport {
  GridType grid_type = GridType::kOctree;
  int resolution = 0;  // lattice points per axis, or the final LoD
  std::size_t input_points = 0;
  std::size_t output_points = 0;
  std::size_t dropped_points = 0;  // near-zero gradients
  double time_s = 0.0;
  std::size_t peak_values = 0;
};

struct CellIndex {
  int lod = 0;
  std::array<int, 3> ijk{0, 0, 0};
  auto operator<=>(const CellIndex&) const = default;
};

struct OctreeLevel {
  int lod = 0;
  double cell_size = 0.0;
  std::vector<CellIndex> cells;
  std::vector<Vec3> centers;
};

struct Extraction {
  SurfacePointCloud cloud;
  SamplingReport report;
  std::vector<OctreeLevel> levels;  // occupied cells per level (octree only)
};

struct OctreeOptions {
  int lod_start = 3;
  int lod_end = 6;
  double kappa = kOccupancyKappa;
  // Additional projection steps after the first one (re-evaluates the field).
  int refine_steps = 0;
  bool keep_levels = false;
};

// 2 / 2^lod.
double cell_size(int lod);
Vec3 cell_center(const CellIndex& cell);

// Occupancy |s| < kappa * cell_size(l) at each level, subdivision into eight
// children, then projection of the final occupied centers.
Extraction extract_octree(const SdfField& sdf, const ColorField* color, const OctreeOptions& options = {});

// resolution^3 lattice linspace(-1, 1), points with |s| <= band projected.
Extraction extract_grid(const SdfField& sdf, const ColorField* color, int resolution, double band = kGridBand,
                        int refine_steps = 0);

struct Projection {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<std::size_t> kept;  // input index of each output
  std::size_t dropped = 0;
};

// p = x - (g / |g|) s and n = g / |g|; points with |g| <= 1e-8 are dropped.
Projection project_points(std::span<const Vec3> points, std::span<const double> sdf, std::span<const Vec3> gradients);

// Vector-Jacobian product of one projection: given dL/dp, returns dL/ds and
// dL/dg.
void project_point_vjp(const Vec3& gradient, double sdf, const Vec3& point_cotangent, double& sdf_cotangent,
                       Vec3& gradient_cotangent);

// Brute-force occupancy over the full 2^lod lattice (test oracle).
std::vector<CellIndex> dense_occupied_cells(const SdfField& sdf, int lod, double kappa = kOccupancyKappa);

struct SamplingConfiguration {
  GridType grid_type = GridType::kOctree;
  int resolution = 6;  // grid points per axis, or final LoD
  int lod_start = 3;
};

// One timed, single-threaded extraction per configuration.
std::vector<SamplingReport> benchmark_sampling(const SdfField& sdf, const ColorField* color,
                                               const std::vector<SamplingConfiguration>& configurations);
std::vector<SamplingConfiguration> default_benchmark_configurations();

std::string sampling_csv_header();
std::string sampling_csv_row(const SamplingReport& report, bool include_time = true);
std::string to_string(GridType type);

}  // namespace osdf
