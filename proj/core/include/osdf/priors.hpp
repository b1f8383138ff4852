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

// Auto-decoder training of the shape and texture prior database.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "osdf/checkpoint.hpp"
#include "osdf/field_net.hpp"
#include "osdf/shapes.hpp"

namespace osdf {

// Colors are attached only within this distance of the surface.
inline constexpr double kColorBand = 0.01;

struct TrainingSample {
  Vec3 point;
  double sdf_gt = 0.0;
  Vec3 color_gt = Vec3::Zero();
  bool has_color = false;
  int object_id = 0;
};

struct SampleCounts {
  int surface = 2000;
  int near = 2000;
  int uniform = 1000;
  double near_sigma = 0.025;
};

// Surface points by rejection in a band followed by Newton projection on the
// oracle; near points are surface + N(0, sigma^2) per axis; uniform points in
// [-1,1]^3. Deterministic per seed.
std::vector<TrainingSample> sample_training_points(const ShapeSpec& spec, const SampleCounts& counts,
                                                   std::uint64_t seed, int object_id = 0);

// Mean |clamp(pred) - clamp(gt)| with clamp to [-delta, delta].
double loss_sdf(std::span<const double> pred, std::span<const double> gt, double delta);
// d loss_sdf / d pred (subgradient 0 where clamped or equal).
std::vector<double> loss_sdf_gradient(std::span<const double> pred, std::span<const double> gt, double delta);

struct ContrastiveMargins {
  double positive = 0.8;
  double negative = 0.2;
};

struct ContrastiveResult {
  double value = 0.0;
  double positive_term = 0.0;
  double negative_term = 0.0;
  std::vector<VectorX<double>> gradients;  // one per code
};

// [m_pos - s_p]_+ averaged over same-category pairs plus [s_n - m_neg]_+
// averaged over cross-category pairs, s = cosine similarity. All pairs in
// the batch are used.
ContrastiveResult loss_contrastive(const std::vector<VectorX<double>>& codes, std::span<const int> labels,
                                   const ContrastiveMargins& margins = {});

// Mean squared error over all channels.
double loss_rgb(std::span<const Vec3> pred, std::span<const Vec3> gt);

struct ShapeTrainConfig {
  NetworkConfig network;
  int d_sdf = 64;
  int steps = 2000;
  int batch = 4096;
  double lr_network = 1e-3;
  double lr_codes = 1e-3;
  // Clamp half-width of the L1 term.
  double delta = 0.25;
  double contrastive_weight = 1.0;
  ContrastiveMargins margins;
  double code_init_std = 0.01;
  SampleCounts samples;
  std::uint64_t seed = 1;
};

struct TextureTrainConfig {
  NetworkConfig network{4, 128, 30.0};
  int d_tex = 64;
  int steps = 1000;
  int batch = 4096;
  double lr_network = 1e-3;
  double lr_codes = 1e-3;
  double code_init_std = 0.01;
  SampleCounts samples{3000, 3000, 0, 0.004};
  std::uint64_t seed = 2;
};

struct TrainLogRow {
  int step = 0;
  double loss_sdf = 0.0;
  double loss_contrastive = 0.0;
  double loss_rgb = 0.0;
  bool has_shape = true;
  bool has_rgb = false;
};

struct TrainLog {
  std::vector<TrainLogRow> rows;

  // Exponential moving average of the total loss at the given step.
  double ema_total(int step, double alpha = 0.05) const;
  std::string to_csv() const;
};

struct ShapePriors {
  FieldNetwork network;
  std::vector<LatentCode> codes;  // shape part filled
  TrainLog log;
};

struct TexturePriors {
  FieldNetwork network;
  std::vector<VectorX<float>> codes;
  TrainLog log;
};

// Jointly optimizes the SDF network and one shape code per spec. Throws
// TrainingError if the loss stays above 10x its initial value for 100
// consecutive steps.
ShapePriors train_shape_priors(const std::vector<ShapeSpec>& specs, const ShapeTrainConfig& config);

// Trains a texture network and one texture code per spec with the shape
// network and shape codes frozen. Supervised within kColorBand of the surface.
TexturePriors train_texture_priors(const std::vector<ShapeSpec>& specs, const FieldNetwork& shape_network,
                                   const std::vector<LatentCode>& shape_codes, const TextureTrainConfig& config);

// Assembles both stages into a checkpoint (texture part optional).
Checkpoint make_checkpoint(const ShapePriors& shape, const TexturePriors* texture);

// Mean shape and texture code of a category; ConfigError if absent.
LatentCode mean_latent(const LatentTable& table, int category);

// Held-out clamped-L1 on fresh oracle samples.
double evaluate_shape_loss(const FieldNetwork& net, const LatentCode& code, const ShapeSpec& spec, double delta,
                           std::uint64_t seed, int count = 2000);

}  // namespace osdf
