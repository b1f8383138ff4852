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

// Test-time refinement of shape code, texture code (optionally the texture
// network) and pose against an observed point cloud.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "osdf/field_net.hpp"
#include "osdf/octree.hpp"
#include "osdf/rotation.hpp"

namespace osdf {

inline constexpr double kPsnrCap = 99.0;

struct Observation {
  std::vector<Vec3> points;
  std::vector<Vec3> colors;  // optional, one per point

  bool has_colors() const { return !colors.empty(); }
  // EmptyObservationError when empty; ConfigError on non-finite values or a
  // color count mismatch.
  void validate() const;
};

// Observation mapped through the inverse pose (camera -> canonical).
Observation to_canonical(const Observation& camera, const Pose& pose);

// -10 log10(MSE) over all channels; kPsnrCap when the MSE is zero.
double psnr(std::span<const Vec3> pred, std::span<const Vec3> gt);
double psnr_from_mse(double mse);

struct TraceRow {
  int step = 0;
  std::string stage;
  double chamfer = std::numeric_limits<double>::quiet_NaN();
  double color_mse = std::numeric_limits<double>::quiet_NaN();
  double psnr = std::numeric_limits<double>::quiet_NaN();
};

struct Trace {
  std::vector<TraceRow> rows;

  void append(const Trace& other);
  // Running minimum of the chamfer column.
  std::vector<double> best_chamfer() const;
  // Header "step,stage,chamfer,color_mse,psnr"; NaN fields are left empty.
  std::string to_csv() const;
};

struct ExtractionLevels {
  int lod_start = 3;
  int lod_end = 5;
};

struct ShapeOptimizeOptions {
  int steps = 200;
  double lr = 1e-3;
  double weight = 1.0;
  ExtractionLevels levels;
};

struct ShapeResult {
  VectorX<float> code;  // best code seen
  Trace trace;          // one row per evaluated step
  double initial_chamfer = 0.0;
  double best_chamfer = 0.0;
  bool aborted = false;  // an extraction came back empty
};

// Adam on chamfer(projected octree surface, observation) with the network
// frozen. The observation must be in the canonical frame. Throws
// EmptySurfaceError only if the initial code has no surface.
ShapeResult optimize_shape(const FieldNetwork& shape_net, const VectorX<float>& init, const Observation& observation,
                           const ShapeOptimizeOptions& options = {});

// Chamfer and d chamfer / d code at one code with frozen correspondences.
struct ShapeGradient {
  double chamfer = 0.0;
  VectorX<float> gradient;
  std::size_t surface_points = 0;
};
ShapeGradient shape_chamfer_gradient(const FieldNetwork& shape_net, const VectorX<float>& code,
                                     std::span<const Vec3> target, const ExtractionLevels& levels = {});

struct TextureOptimizeOptions {
  int steps = 200;
  double lr = 1e-2;
  double weight = 0.3;
  bool fine_tune = false;
  int fine_tune_steps = 200;
  double fine_tune_lr = 1e-5;
  ExtractionLevels levels;
};

struct TextureResult {
  VectorX<float> texture_code;
  std::optional<FieldNetwork> network;  // set when fine-tuned
  Trace trace;
  double initial_mse = 0.0;
  double optimized_mse = 0.0;   // best after the code stage
  double fine_tuned_mse = 0.0;  // best after fine-tuning (== optimized_mse without it)
};

// Each observed point is matched to its nearest extracted surface point;
// the loss is weight * MSE between the predicted color there and the
// observed color. The surface is extracted once. ConfigError when the
// observation has no colors.
TextureResult optimize_texture(const FieldNetwork& shape_net, const FieldNetwork& texture_net,
                               const VectorX<float>& shape_code, const VectorX<float>& texture_init,
                               const Observation& observation, const TextureOptimizeOptions& options = {});

// Color MSE of a texture code against the observation (same matching as
// optimize_texture).
double texture_mse(const FieldNetwork& shape_net, const FieldNetwork& texture_net, const VectorX<float>& shape_code,
                   const VectorX<float>& texture_code, const Observation& observation,
                   const ExtractionLevels& levels = {});

struct PoseOptimizeOptions {
  int steps = 200;
  double lr = 5e-3;
  ExtractionLevels levels;
};

struct PoseResult {
  Pose pose;
  RotationParam9 raw;
  Trace trace;
  double initial_chamfer = 0.0;
  double best_chamfer = 0.0;
  bool aborted = false;  // rotation parameters degenerated
};

// Adam on the raw rotation, translation and log-scale; canonical points
// are mapped by s R q + t and compared with the camera-frame observation.
PoseResult optimize_pose(std::span<const Vec3> canonical_points, const Pose& init, const Observation& observation,
                         const PoseOptimizeOptions& options = {});
// Extracts the canonical surface of shape_code once, then as above.
PoseResult optimize_pose(const FieldNetwork& shape_net, const VectorX<float>& shape_code, const Pose& init,
                         const Observation& observation, const PoseOptimizeOptions& options = {});

struct JointSchedule {
  int rounds = 1;
  int pose_steps = 100;
  int shape_steps = 200;
  int texture_steps = 200;
  bool fine_tune = false;
  int fine_tune_steps = 200;
  double pose_lr = 5e-3;
  double shape_lr = 1e-3;
  double texture_lr = 1e-2;
  double fine_tune_lr = 1e-5;
  double shape_weight = 1.0;
  double texture_weight = 0.3;
  // Learning rates are scaled by clamp(points / reference_points, 0.25, 1).
  std::size_t reference_points = 2000;
  ExtractionLevels levels;

  int total_steps() const;
};

double adaptive_lr_scale(std::size_t observed_points, std::size_t reference_points);

struct JointResult {
  LatentCode code;
  Pose pose;
  RotationParam9 raw;
  std::optional<FieldNetwork> texture_network;
  Trace trace;
};

// Alternates pose, shape, texture (and fine-tune) blocks for the given
// number of rounds. texture_net may be null, in which case texture stages
// are skipped; they are also skipped when the observation has no colors.
JointResult joint_refine(const FieldNetwork& shape_net, const FieldNetwork* texture_net, const LatentCode& init,
                         const Pose& pose, const Observation& observation, const JointSchedule& schedule = {});

}  // namespace osdf
