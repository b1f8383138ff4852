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

// The osdf command-line tool as a library so the commands can be driven
// in-process.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "osdf/heatmap.hpp"
#include "osdf/optimize.hpp"

namespace osdf::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitTraining = 3,
  kExitEmpty = 4,
};

struct TrainingSettings {
  int shape_steps = 2000;
  int texture_steps = 1000;
  int batch = 4096;
  int hidden_layers = 4;
  int hidden_width = 128;
  int d_sdf = 64;
  int d_tex = 64;
  double lr = 1e-3;
  bool texture = true;
};

// Keys of the JSON config file mirror the field names; see README.
struct RunConfig {
  std::string command;
  std::filesystem::path shapes;
  std::filesystem::path checkpoint;
  std::filesystem::path out = "osdf_out";
  std::uint64_t seed = 1;
  bool deterministic = false;

  int lod_start = 3;
  int lod_end = 6;
  int grid_res = 0;  // > 0 selects the dense grid baseline

  int object = 0;
  int category = -1;  // >= 0: start from the category mean code
  std::filesystem::path latent;  // JSON {"shape": [...], "texture": [...]}

  std::filesystem::path observation;  // PLY in the camera frame
  std::filesystem::path depth;        // raster pair, used without a PLY
  std::filesystem::path mask;
  std::filesystem::path color;
  Intrinsics intrinsics;
  int label = -1;
  std::filesystem::path pose;  // initial pose file (identity if empty)

  std::filesystem::path scene;
  bool oracle = false;  // bench on the analytic shape instead of the network

  TrainingSettings training;
  JointSchedule schedule;

  void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

// Parses argv-style arguments (without the program name) and runs one
// subcommand. Returns an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_train_priors(const RunConfig& config, std::ostream& out);
int cmd_extract(const RunConfig& config, std::ostream& out);
int cmd_optimize(const RunConfig& config, std::ostream& out);
int cmd_bench(const RunConfig& config, std::ostream& out);
int cmd_demo_detect(const RunConfig& config, std::ostream& out);

}  // namespace osdf::cli
