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

// Detection-head target and loss math on synthetic maps: Gaussian center
// splatting, peak picking, per-pixel code sampling, and the training losses.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "osdf/field_net.hpp"
#include "osdf/rotation.hpp"

namespace osdf {

inline constexpr int kDefaultDownsample = 8;
inline constexpr double kCodeGate = 0.3;

// Row-major h x w x c array of doubles.
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(int h, int w, int c, double fill = 0.0);
  double& at(int y, int x, int c = 0) { return data[index(y, x, c)]; }
  double at(int y, int x, int c = 0) const { return data[index(y, x, c)]; }
  bool same_shape(const FeatureMap& o) const { return height == o.height && width == o.width && channels == o.channels; }
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels) + static_cast<std::size_t>(c);
  }
};

// Single-channel map with values in [0,1].
using Heatmap = FeatureMap;

struct CenterTarget {
  int x = 0;  // heatmap pixel
  int y = 0;
  double bbox_width = 0.0;  // input-image pixels
  double bbox_height = 0.0;
};

// max(1, diag / (6 R)) in heatmap pixels.
double splat_sigma(double bbox_width, double bbox_height, int downsample = kDefaultDownsample);

// Per-center Gaussians combined by per-pixel max. ConfigError when a
// center lies outside the map.
Heatmap splat_targets(std::span<const CenterTarget> centers, int height, int width,
                      int downsample = kDefaultDownsample);

// Mean squared difference; ConfigError on shape mismatch.
double heatmap_mse(const FeatureMap& pred, const FeatureMap& target);

struct Peak {
  int x = 0;
  int y = 0;
  double score = 0.0;
};

// Strict 3x3 local maxima (out-of-map neighbours ignored) with score >=
// threshold, by descending score; equal scores keep scan order.
std::vector<Peak> detect_peaks(const Heatmap& heatmap, double threshold);

struct CodeMaps {
  FeatureMap shape;    // d_sdf channels
  FeatureMap texture;  // d_tex channels
  FeatureMap pose;     // 13 channels: rotation9, translation3, scale1

  void validate() const;
};

struct SampledObject {
  int x = 0;
  int y = 0;
  double score = 0.0;
  VectorX<double> shape_code;
  VectorX<double> texture_code;
  std::array<double, 13> pose_raw{};
  Pose pose;
};

// Channel vectors at each peak pixel; the pose channels go through
// rot9_to_so3. ConfigError for out-of-bounds centers.
std::vector<SampledObject> sample_codes(const CodeMaps& maps, std::span<const Peak> centers);

// Mean |pred - gt| over channels and over pixels where target > gate; 0 if
// no pixel passes.
double gated_l1(const FeatureMap& pred, const FeatureMap& gt, const Heatmap& target, double gate = kCodeGate);

// Sum over pixels of -log p(label). probabilities is h x w x classes;
// ConfigError unless every pixel is positive and sums to 1 within 1e-6.
double mask_ce(const FeatureMap& probabilities, std::span<const int> labels);

struct LossParts {
  double inst = 0.0;
  double sdf = 0.0;
  double tex = 0.0;
  double mask = 0.0;
  double pose = 0.0;
};

struct LossWeights {
  double inst = 100.0;
  double sdf = 1.0;
  double tex = 1.0;
  double mask = 1.0;
  double pose = 1.0;
};

double combined_loss(const LossParts& parts, const LossWeights& weights = {});

struct Intrinsics {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 0.0;
  double cy = 0.0;

  void validate() const;
};

// Single-channel depth map (meters) and per-pixel instance labels (0 =
// background).
struct DepthObservation {
  FeatureMap depth;
  std::vector<int> mask;
  FeatureMap color;  // optional h x w x 3 in [0,1]
  Intrinsics intrinsics;
};

// ((u - cx) d / fx, (v - cy) d / fy, d) for pixels with mask == label (any
// nonzero label when label < 0) and d > 0. EmptyObservationError if no
// pixel qualifies. Colors are filled when the color map is present.
void depth_to_pointcloud(const DepthObservation& obs, int label, std::vector<Vec3>& points,
                         std::vector<Vec3>* colors = nullptr);
std::vector<Vec3> depth_to_pointcloud(const FeatureMap& depth, std::span<const int> mask,
                                      const Intrinsics& intrinsics, int label = -1);

// Ray-cast depth of a sphere (center in camera frame) with the same
// pinhole model; pixels that miss get depth 0 and label 0.
DepthObservation render_sphere_depth(const Vec3& center, double radius, int height, int width,
                                     const Intrinsics& intrinsics);

// Flat binary raster: "OSDM", u32 version, u32 height, u32 width,
// u32 channels, u8 dtype (0 = u8, 1 = f32), 3 pad bytes, then little-endian
// row-major samples.
enum class RasterType : std::uint8_t { kU8 = 0, kF32 = 1 };
std::string encode_raster(const FeatureMap& map, RasterType type);
FeatureMap decode_raster(const std::string& bytes, RasterType* type = nullptr);
void write_raster(const std::filesystem::path& path, const FeatureMap& map, RasterType type);
FeatureMap read_raster(const std::filesystem::path& path, RasterType* type = nullptr);

struct PlantedObject {
  CenterTarget center;
  std::vector<double> shape_code;
  std::vector<double> texture_code;
  std::array<double, 13> pose_raw{1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1};
};

struct SyntheticScene {
  int height = 480;  // input image pixels
  int width = 640;
  int downsample = kDefaultDownsample;
  int d_sdf = 8;
  int d_tex = 8;
  double noise_sigma = 0.0;  // added to the heatmap, result floored at 0
  double threshold = 0.3;
  std::uint64_t seed = 1;
  std::vector<PlantedObject> objects;

  int map_height() const { return height / downsample; }
  int map_width() const { return width / downsample; }
};

SyntheticScene parse_scene(const std::string& json_text);
SyntheticScene load_scene(const std::filesystem::path& path);
std::string dump_scene(const SyntheticScene& scene);

// Randomly placed objects separated by at least 3 max sigma; codes and
// poses drawn from the seed.
SyntheticScene random_scene(int objects, std::uint64_t seed, double noise_sigma = 0.0);

struct SceneMaps {
  Heatmap heatmap;
  CodeMaps codes;
};

// Heatmap from splat_targets (plus noise); every pixel of the code maps
// holds the codes of the object whose splat is largest there.
SceneMaps render_scene_maps(const SyntheticScene& scene);

struct DetectionMatch {
  int planted = 0;
  int detected = -1;  // index into detections, -1 if missed
  double center_error = 0.0;  // pixels
  double code_error = 0.0;    // max abs over shape and texture channels
  double rotation_error = 0.0;  // radians
};

struct DetectionReport {
  std::vector<SampledObject> detections;
  std::vector<DetectionMatch> matches;
  int recovered = 0;
  int planted = 0;

  double recovery_rate() const { return planted == 0 ? 1.0 : static_cast<double>(recovered) / planted; }
  std::string to_csv() const;
};

// Planted objects are matched greedily (by detection score) to peaks within
// tolerance pixels of their center.
DetectionReport run_detection(const SyntheticScene& scene, double tolerance = 1.5);

}  // namespace osdf
