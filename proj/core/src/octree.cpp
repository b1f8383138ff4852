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

#include "osdf/octree.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

namespace osdf {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Projects (x, s, g) triples and fills the cloud, optionally re-projecting.
void finish_cloud(const SdfField& sdf, const ColorField* color, std::vector<Vec3> sources, std::vector<double> values,
                  std::vector<Vec3> grads, int refine_steps, Extraction& ex) {
  Projection proj = project_points(sources, values, grads);
  ex.report.dropped_points += proj.dropped;
  SurfacePointCloud& cloud = ex.cloud;
  cloud.points = std::move(proj.points);
  cloud.normals = std::move(proj.normals);
  cloud.sources.reserve(proj.kept.size());
  cloud.sdf.reserve(proj.kept.size());
  cloud.gradient_norms.reserve(proj.kept.size());
  for (std::size_t k : proj.kept) {
    cloud.sources.push_back(sources[k]);
    cloud.sdf.push_back(values[k]);
    cloud.gradient_norms.push_back(grads[k].norm());
  }
  for (int step = 0; step < refine_steps && !cloud.points.empty(); ++step) {
    std::vector<double> v(cloud.points.size());
    std::vector<Vec3> g(cloud.points.size());
    sdf.evaluate_with_gradient(cloud.points, v, g);
    ex.report.input_points += cloud.points.size();
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      const double gn = g[i].norm();
      if (gn <= 1e-8) continue;
      cloud.normals[i] = g[i] / gn;
      cloud.points[i] -= cloud.normals[i] * v[i];
    }
  }
  if (color && !cloud.points.empty()) {
    cloud.colors.resize(cloud.points.size());
    color->evaluate(cloud.points, cloud.colors);
    for (auto& c : cloud.colors) c = c.cwiseMax(0.0).cwiseMin(1.0);
  }
  ex.report.output_points = cloud.points.size();
}

}  // namespace

void AnalyticSdf::evaluate(std::span<const Vec3> points, std::span<double> values) const {
  for (std::size_t i = 0; i < points.size(); ++i) values[i] = analytic_sdf(spec_, points[i]);
}

void AnalyticSdf::evaluate_with_gradient(std::span<const Vec3> points, std::span<double> values,
                                         std::span<Vec3> gradients) const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    values[i] = analytic_sdf(spec_, points[i]);
    gradients[i] = analytic_sdf_gradient(spec_, points[i]);
  }
}

void AnalyticColor::evaluate(std::span<const Vec3> points, std::span<Vec3> colors) const {
  for (std::size_t i = 0; i < points.size(); ++i) colors[i] = analytic_color(spec_, points[i]);
}

NetworkSdf::NetworkSdf(const FieldNetwork& net, VectorX<float> shape_code) : net_(net), code_(std::move(shape_code)) {
  if (net.kind() != FieldKind::kSdf) throw ConfigError("NetworkSdf needs an SDF network");
  if (code_.size() != net.d_sdf()) throw ConfigError("NetworkSdf: shape code dimension mismatch");
}

void NetworkSdf::evaluate(std::span<const Vec3> points, std::span<double> values) const {
  parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
    constexpr std::size_t kChunk = 4096;
    for (std::size_t b = begin; b < end; b += kChunk) {
      const std::size_t n = std::min(kChunk, end - b);
      const MatrixX<float> out =
          forward_block(net_, detail::pack_points<float>(points.subspan(b, n)), code_, static_cast<ForwardCache<float>*>(nullptr));
      for (std::size_t i = 0; i < n; ++i) values[b + i] = out(0, static_cast<Eigen::Index>(i));
    }
  });
}

void NetworkSdf::evaluate_with_gradient(std::span<const Vec3> points, std::span<double> values,
                                        std::span<Vec3> gradients) const {
  parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
    ::osdf::evaluate_with_gradient<float>(net_, code_, points.subspan(begin, end - begin), values.subspan(begin, end - begin),
                                  gradients.subspan(begin, end - begin));
  });
}

std::size_t NetworkSdf::live_values_per_point() const {
  // Activations retained for the backward pass.
  std::size_t n = 3;
  for (const auto& l : net_.layers()) n += 2 * static_cast<std::size_t>(l.weight.rows());
  return n;
}

NetworkColor::NetworkColor(const FieldNetwork& net, VectorX<float> shape_code, VectorX<float> texture_code)
    : net_(net) {
  if (net.kind() != FieldKind::kTexture) throw ConfigError("NetworkColor needs a texture network");
  if (shape_code.size() != net.d_sdf() || texture_code.size() != net.d_tex())
    throw ConfigError("NetworkColor: latent dimension mismatch");
  tail_.resize(net.latent_dim());
  tail_ << shape_code, texture_code;
}

void NetworkColor::evaluate(std::span<const Vec3> points, std::span<Vec3> colors) const {
  parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
    constexpr std::size_t kChunk = 4096;
    for (std::size_t b = begin; b < end; b += kChunk) {
      const std::size_t n = std::min(kChunk, end - b);
      const MatrixX<float> out =
          forward_block(net_, detail::pack_points<float>(points.subspan(b, n)), tail_, static_cast<ForwardCache<float>*>(nullptr));
      for (std::size_t i = 0; i < n; ++i) colors[b + i] = out.col(static_cast<Eigen::Index>(i)).cast<double>();
    }
  });
}

double cell_size(int lod) {
  if (lod < 0) throw ConfigError("cell_size: lod must be non-negative");
  return 2.0 / std::ldexp(1.0, lod);
}

Vec3 cell_center(const CellIndex& cell) {
  const double c = cell_size(cell.lod);
  return {-1.0 + (cell.ijk[0] + 0.5) * c, -1.0 + (cell.ijk[1] + 0.5) * c, -1.0 + (cell.ijk[2] + 0.5) * c};
}

Projection project_points(std::span<const Vec3> points, std::span<const double> sdf, std::span<const Vec3> gradients) {
  if (points.size() != sdf.size() || points.size() != gradients.size())
    throw ConfigError("project_points: inputs must have equal length");
  Projection out;
  out.points.reserve(points.size());
  out.normals.reserve(points.size());
  out.kept.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double gn = gradients[i].norm();
    if (!(gn > 1e-8)) {
      ++out.dropped;
      continue;
    }
    const Vec3 n = gradients[i] / gn;
    out.points.push_back(points[i] - n * sdf[i]);
    out.normals.push_back(n);
    out.kept.push_back(i);
  }
  return out;
}

void project_point_vjp(const Vec3& gradient, double sdf, const Vec3& point_cotangent, double& sdf_cotangent,
                       Vec3& gradient_cotangent) {
  const double gn = gradient.norm();
  const Vec3 n = gradient / gn;
  sdf_cotangent = -n.dot(point_cotangent);
  gradient_cotangent = -sdf / gn * (point_cotangent - n * n.dot(point_cotangent));
}

Extraction extract_octree(const SdfField& sdf, const ColorField* color, const OctreeOptions& options) {
  if (options.lod_start < 0 || options.lod_end < options.lod_start || options.lod_end > 10)
    throw ConfigError("extract_octree: need 0 <= lod_start <= lod_end <= 10");
  if (!(options.kappa > 0.0)) throw ConfigError("extract_octree: kappa must be positive");
  const auto t0 = Clock::now();
  Extraction ex;
  ex.report.grid_type = GridType::kOctree;
  ex.report.resolution = options.lod_end;

  std::vector<CellIndex> cells;
  {
    const int n = 1 << options.lod_start;
    cells.reserve(static_cast<std::size_t>(n) * n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) cells.push_back({options.lod_start, {i, j, k}});
  }

  for (int lod = options.lod_start; lod <= options.lod_end; ++lod) {
    const bool final_level = lod == options.lod_end;
    std::vector<Vec3> centers(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) centers[i] = cell_center(cells[i]);
    std::vector<double> values(cells.size());
    std::vector<Vec3> grads;
    if (final_level) {
      grads.resize(cells.size());
      sdf.evaluate_with_gradient(centers, values, grads);
    } else {
      sdf.evaluate(centers, values);
    }
    ex.report.input_points += cells.size();
    ex.report.peak_values = std::max(ex.report.peak_values, cells.size() * sdf.live_values_per_point());

    const double threshold = options.kappa * cell_size(lod);
    OctreeLevel level;
    level.lod = lod;
    level.cell_size = cell_size(lod);
    std::vector<double> kept_values;
    std::vector<Vec3> kept_grads;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!(std::abs(values[i]) < threshold)) continue;
      level.cells.push_back(cells[i]);
      level.centers.push_back(centers[i]);
      if (final_level) {
        kept_values.push_back(values[i]);
        kept_grads.push_back(grads[i]);
      }
    }
    if (level.cells.empty())
      throw EmptySurfaceError("octree extraction: no occupied cells at LoD " + std::to_string(lod));

    if (final_level) {
      std::vector<Vec3> sources = level.centers;
      if (options.keep_levels) ex.levels.push_back(level);
      finish_cloud(sdf, color, std::move(sources), std::move(kept_values), std::move(kept_grads),
                   options.refine_steps, ex);
      break;
    }
    std::vector<CellIndex> next;
    next.reserve(level.cells.size() * 8);
    for (const auto& c : level.cells)
      for (int d = 0; d < 8; ++d)
        next.push_back({lod + 1, {2 * c.ijk[0] + (d & 1), 2 * c.ijk[1] + ((d >> 1) & 1), 2 * c.ijk[2] + ((d >> 2) & 1)}});
    if (options.keep_levels) ex.levels.push_back(std::move(level));
    cells = std::move(next);
  }
  ex.report.time_s = seconds_since(t0);
  return ex;
}

Extraction extract_grid(const SdfField& sdf, const ColorField* color, int resolution, double band, int refine_steps) {
  if (resolution < 2) throw ConfigError("extract_grid: resolution must be at least 2");
  if (!(band > 0.0)) throw ConfigError("extract_grid: band must be positive");
  const auto t0 = Clock::now();
  Extraction ex;
  ex.report.grid_type = GridType::kOrdinary;
  ex.report.resolution = resolution;

  const auto n = static_cast<std::size_t>(resolution);
  std::vector<Vec3> lattice;
  lattice.reserve(n * n * n);
  const double step = 2.0 / static_cast<double>(resolution - 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        lattice.emplace_back(-1.0 + step * static_cast<double>(i), -1.0 + step * static_cast<double>(j),
                             -1.0 + step * static_cast<double>(k));
  std::vector<double> values(lattice.size());
  sdf.evaluate(lattice, values);
  ex.report.input_points = lattice.size();
  ex.report.peak_values = lattice.size() * sdf.live_values_per_point();

  std::vector<Vec3> band_points;
  for (std::size_t i = 0; i < lattice.size(); ++i)
    if (std::abs(values[i]) <= band) band_points.push_back(lattice[i]);
  if (band_points.empty()) throw EmptySurfaceError("grid extraction: no points inside the narrow band");
  std::vector<double> band_values(band_points.size());
  std::vector<Vec3> band_grads(band_points.size());
  sdf.evaluate_with_gradient(band_points, band_values, band_grads);
  finish_cloud(sdf, color, std::move(band_points), std::move(band_values), std::move(band_grads), refine_steps, ex);
  ex.report.time_s = seconds_since(t0);
  return ex;
}

std::vector<CellIndex> dense_occupied_cells(const SdfField& sdf, int lod, double kappa) {
  const int n = 1 << lod;
  std::vector<CellIndex> cells;
  cells.reserve(static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) cells.push_back({lod, {i, j, k}});
  std::vector<Vec3> centers(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) centers[i] = cell_center(cells[i]);
  std::vector<double> values(cells.size());
  sdf.evaluate(centers, values);
  const double threshold = kappa * cell_size(lod);
  std::vector<CellIndex> occupied;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (std::abs(values[i]) < threshold) occupied.push_back(cells[i]);
  return occupied;
}

std::vector<SamplingReport> benchmark_sampling(const SdfField& sdf, const ColorField* color,
                                               const std::vector<SamplingConfiguration>& configurations) {
  ScopedThreadCap single(1);
  std::vector<SamplingReport> reports;
  for (const auto& c : configurations) {
    Extraction ex = c.grid_type == GridType::kOrdinary
                        ? extract_grid(sdf, color, c.resolution)
                        : extract_octree(sdf, color, OctreeOptions{c.lod_start, c.resolution});
    reports.push_back(ex.report);
  }
  return reports;
}

std::vector<SamplingConfiguration> default_benchmark_configurations() {
  return {{GridType::kOrdinary, 40, 0}, {GridType::kOrdinary, 50, 0}, {GridType::kOrdinary, 60, 0},
          {GridType::kOctree, 5, 3},    {GridType::kOctree, 6, 3},    {GridType::kOctree, 7, 3}};
}

std::string to_string(GridType type) { return type == GridType::kOrdinary ? "ordinary" : "octree"; }

std::string sampling_csv_header() { return "grid_type,resolution,input_points,output_points,time_s,peak_values"; }

std::string sampling_csv_row(const SamplingReport& r, bool include_time) {
  std::ostringstream os;
  os << to_string(r.grid_type) << ',' << r.resolution << ',' << r.input_points << ',' << r.output_points << ',';
  if (include_time) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", r.time_s);
    os << buf;
  }
  os << ',' << r.peak_values;
  return os.str();
}

}  // namespace osdf
