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

#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "osdf/chamfer.hpp"
#include "osdf/checkpoint.hpp"
#include "osdf/octree.hpp"
#include "osdf/ply.hpp"
#include "osdf/priors.hpp"

namespace osdf::cli {
namespace {

using nlohmann::json;

template <typename T>
void read_key(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

void read_path(const json& j, const char* key, std::filesystem::path& target) {
  if (j.contains(key)) target = j.at(key).get<std::string>();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void prepare_out(const RunConfig& c) { std::filesystem::create_directories(c.out); }

Checkpoint require_checkpoint(const RunConfig& c) {
  if (c.checkpoint.empty()) throw ConfigError("a checkpoint path is required");
  if (!std::filesystem::exists(c.checkpoint)) throw ConfigError("checkpoint not found: " + c.checkpoint.string());
  return load_checkpoint(c.checkpoint);
}

LatentCode load_latent_file(const std::filesystem::path& path, const Checkpoint& ck) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open latent file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("latent file: ") + e.what());
  }
  auto vec = [&](const char* key, int size) {
    const auto v = j.value(key, std::vector<float>(static_cast<std::size_t>(size), 0.0f));
    if (static_cast<int>(v.size()) != size) throw ConfigError(std::string("latent file: '") + key + "' has the wrong length");
    return VectorX<float>(Eigen::Map<const VectorX<float>>(v.data(), size));
  };
  LatentCode code;
  code.shape = vec("shape", ck.latents.d_sdf);
  code.texture = vec("texture", ck.latents.d_tex);
  code.category = j.value("category", 0);
  return code;
}

LatentCode choose_code(const RunConfig& c, const Checkpoint& ck) {
  if (!c.latent.empty()) return load_latent_file(c.latent, ck);
  if (c.category >= 0) return mean_latent(ck.latents, c.category);
  if (c.object < 0 || static_cast<std::size_t>(c.object) >= ck.latents.size())
    throw ConfigError("object id " + std::to_string(c.object) + " is not in the checkpoint");
  return ck.latents.codes[static_cast<std::size_t>(c.object)];
}

Observation load_observation(const RunConfig& c) {
  Observation obs;
  if (!c.observation.empty()) {
    const PointCloud cloud = read_ply(c.observation);
    obs.points = cloud.points;
    obs.colors = cloud.colors;
  } else if (!c.depth.empty() && !c.mask.empty()) {
    DepthObservation d;
    d.depth = read_raster(c.depth);
    const FeatureMap mask = read_raster(c.mask);
    if (mask.height != d.depth.height || mask.width != d.depth.width || mask.channels != 1)
      throw ConfigError("mask raster does not match the depth raster");
    d.mask.reserve(mask.data.size());
    for (double v : mask.data) d.mask.push_back(static_cast<int>(v));
    if (!c.color.empty()) {
      RasterType type;
      d.color = read_raster(c.color, &type);
      if (type == RasterType::kU8)
        for (double& v : d.color.data) v /= 255.0;
    }
    d.intrinsics = c.intrinsics;
    depth_to_pointcloud(d, c.label, obs.points, d.color.data.empty() ? nullptr : &obs.colors);
  } else {
    throw ConfigError("optimize needs an observation PLY or a depth and mask raster");
  }
  obs.validate();
  return obs;
}

PointCloud camera_cloud(const FieldNetwork& shape_net, const FieldNetwork* texture_net, const LatentCode& code,
                        const Pose& pose, int lod_start, int lod_end) {
  NetworkSdf sdf(shape_net, code.shape);
  std::optional<NetworkColor> color;
  if (texture_net) color.emplace(*texture_net, code.shape, code.texture);
  OctreeOptions o;
  o.lod_start = lod_start;
  o.lod_end = lod_end;
  const Extraction ex = extract_octree(sdf, color ? &*color : nullptr, o);
  PointCloud cloud;
  for (std::size_t i = 0; i < ex.cloud.size(); ++i) {
    cloud.points.push_back(pose.apply(ex.cloud.points[i]));
    cloud.normals.push_back(pose.rotation * ex.cloud.normals[i]);
  }
  cloud.colors = ex.cloud.colors;
  return cloud;
}

json code_json(const LatentCode& code) {
  return {{"shape", std::vector<float>(code.shape.data(), code.shape.data() + code.shape.size())},
          {"texture", std::vector<float>(code.texture.data(), code.texture.data() + code.texture.size())},
          {"category", code.category}};
}

// Command-line values; unset fields leave the config untouched.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> lod_start, lod_end, grid_res, steps, object, category;
  std::optional<double> lr;
  bool fine_tune = false, deterministic = false, oracle = false;
  std::optional<std::string> out, shapes, checkpoint, observation, depth, mask, color, pose, latent, scene;
};

void add_flags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON run configuration");
  app->add_option_function<std::uint64_t>("--seed", [&o](const std::uint64_t& v) { o.seed = v; }, "RNG seed");
  app->add_option_function<int>("--lod-start", [&o](const int& v) { o.lod_start = v; }, "Coarsest octree level");
  app->add_option_function<int>("--lod-end", [&o](const int& v) { o.lod_end = v; }, "Finest octree level");
  app->add_option_function<int>("--grid-res", [&o](const int& v) { o.grid_res = v; }, "Dense grid resolution (0 = octree)");
  app->add_option_function<int>("--steps", [&o](const int& v) { o.steps = v; }, "Step count for every stage");
  app->add_option_function<double>("--lr", [&o](const double& v) { o.lr = v; }, "Base learning rate");
  app->add_flag("--fine-tune", o.fine_tune, "Fine-tune the texture network after code optimization");
  app->add_flag("--deterministic", o.deterministic, "Single-threaded, reproducible run");
  app->add_option_function<std::string>("--out", [&o](const std::string& v) { o.out = v; }, "Output directory");
  app->add_option_function<std::string>("--shapes", [&o](const std::string& v) { o.shapes = v; }, "Shape spec JSON");
  app->add_option_function<std::string>("--checkpoint", [&o](const std::string& v) { o.checkpoint = v; }, "Checkpoint file");
  app->add_option_function<int>("--object", [&o](const int& v) { o.object = v; }, "Object id in the checkpoint");
  app->add_option_function<int>("--category", [&o](const int& v) { o.category = v; }, "Start from the category mean");
  app->add_option_function<std::string>("--latent", [&o](const std::string& v) { o.latent = v; }, "Latent code JSON");
  app->add_option_function<std::string>("--observation", [&o](const std::string& v) { o.observation = v; }, "Observed PLY");
  app->add_option_function<std::string>("--depth", [&o](const std::string& v) { o.depth = v; }, "Depth raster");
  app->add_option_function<std::string>("--mask", [&o](const std::string& v) { o.mask = v; }, "Mask raster");
  app->add_option_function<std::string>("--color", [&o](const std::string& v) { o.color = v; }, "Color raster");
  app->add_option_function<std::string>("--pose", [&o](const std::string& v) { o.pose = v; }, "Initial pose file");
  app->add_option_function<std::string>("--scene", [&o](const std::string& v) { o.scene = v; }, "Synthetic scene JSON");
  app->add_flag("--oracle", o.oracle, "Benchmark the analytic shape");
}

RunConfig resolve(const std::string& command, const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  c.command = command;
  if (o.seed) c.seed = *o.seed;
  if (o.lod_start) c.lod_start = *o.lod_start;
  if (o.lod_end) c.lod_end = *o.lod_end;
  if (o.grid_res) c.grid_res = *o.grid_res;
  if (o.steps) {
    if (command == "train-priors") {
      c.training.shape_steps = *o.steps;
      c.training.texture_steps = *o.steps;
    } else {
      c.schedule.pose_steps = c.schedule.pose_steps > 0 ? *o.steps : 0;
      c.schedule.shape_steps = *o.steps;
      c.schedule.texture_steps = *o.steps;
      c.schedule.fine_tune_steps = *o.steps;
    }
  }
  if (o.lr) {
    if (command == "train-priors") c.training.lr = *o.lr;
    else c.schedule.shape_lr = *o.lr;
  }
  if (o.fine_tune) c.schedule.fine_tune = true;
  if (o.deterministic) c.deterministic = true;
  if (o.oracle) c.oracle = true;
  if (o.object) c.object = *o.object;
  if (o.category) c.category = *o.category;
  auto set = [](const std::optional<std::string>& v, std::filesystem::path& p) {
    if (v) p = *v;
  };
  set(o.out, c.out);
  set(o.shapes, c.shapes);
  set(o.checkpoint, c.checkpoint);
  set(o.observation, c.observation);
  set(o.depth, c.depth);
  set(o.mask, c.mask);
  set(o.color, c.color);
  set(o.pose, c.pose);
  set(o.latent, c.latent);
  set(o.scene, c.scene);
  c.validate();
  return c;
}

}  // namespace

void RunConfig::validate() const {
  if (lod_start < 1 || lod_end < lod_start || lod_end > 10) throw ConfigError("need 1 <= lod_start <= lod_end <= 10");
  if (grid_res < 0 || grid_res == 1 || grid_res > 512) throw ConfigError("grid_res must be 0 or in [2, 512]");
  if (training.shape_steps < 0 || training.texture_steps < 0 || training.batch <= 0 || training.hidden_layers < 1 ||
      training.hidden_width < 1 || training.d_sdf < 1 || training.d_tex < 1 || !(training.lr > 0.0))
    throw ConfigError("invalid training settings");
  if (schedule.rounds < 0 || schedule.pose_steps < 0 || schedule.shape_steps < 0 || schedule.texture_steps < 0 ||
      schedule.fine_tune_steps < 0)
    throw ConfigError("schedule step counts must be non-negative");
  if (!(schedule.shape_lr > 0.0) || !(schedule.texture_lr > 0.0) || !(schedule.pose_lr > 0.0) ||
      !(schedule.fine_tune_lr > 0.0))
    throw ConfigError("learning rates must be positive");
  if (schedule.levels.lod_start < 1 || schedule.levels.lod_end < schedule.levels.lod_start)
    throw ConfigError("invalid optimization extraction levels");
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  RunConfig c;
  try {
    read_key(j, "command", c.command);
    read_path(j, "shapes", c.shapes);
    read_path(j, "checkpoint", c.checkpoint);
    read_path(j, "out", c.out);
    read_key(j, "seed", c.seed);
    read_key(j, "deterministic", c.deterministic);
    read_key(j, "lod_start", c.lod_start);
    read_key(j, "lod_end", c.lod_end);
    read_key(j, "grid_res", c.grid_res);
    read_key(j, "object", c.object);
    read_key(j, "category", c.category);
    read_path(j, "latent", c.latent);
    read_path(j, "observation", c.observation);
    read_path(j, "depth", c.depth);
    read_path(j, "mask", c.mask);
    read_path(j, "color", c.color);
    read_key(j, "label", c.label);
    read_path(j, "pose", c.pose);
    read_path(j, "scene", c.scene);
    read_key(j, "oracle", c.oracle);
    if (j.contains("intrinsics")) {
      const auto& k = j["intrinsics"];
      read_key(k, "fx", c.intrinsics.fx);
      read_key(k, "fy", c.intrinsics.fy);
      read_key(k, "cx", c.intrinsics.cx);
      read_key(k, "cy", c.intrinsics.cy);
    }
    if (j.contains("training")) {
      const auto& t = j["training"];
      read_key(t, "shape_steps", c.training.shape_steps);
      read_key(t, "texture_steps", c.training.texture_steps);
      read_key(t, "batch", c.training.batch);
      read_key(t, "hidden_layers", c.training.hidden_layers);
      read_key(t, "hidden_width", c.training.hidden_width);
      read_key(t, "d_sdf", c.training.d_sdf);
      read_key(t, "d_tex", c.training.d_tex);
      read_key(t, "lr", c.training.lr);
      read_key(t, "texture", c.training.texture);
    }
    if (j.contains("schedule")) {
      const auto& s = j["schedule"];
      auto& d = c.schedule;
      read_key(s, "rounds", d.rounds);
      read_key(s, "pose_steps", d.pose_steps);
      read_key(s, "shape_steps", d.shape_steps);
      read_key(s, "texture_steps", d.texture_steps);
      read_key(s, "fine_tune", d.fine_tune);
      read_key(s, "fine_tune_steps", d.fine_tune_steps);
      read_key(s, "pose_lr", d.pose_lr);
      read_key(s, "shape_lr", d.shape_lr);
      read_key(s, "texture_lr", d.texture_lr);
      read_key(s, "fine_tune_lr", d.fine_tune_lr);
      read_key(s, "shape_weight", d.shape_weight);
      read_key(s, "texture_weight", d.texture_weight);
      read_key(s, "reference_points", d.reference_points);
      read_key(s, "lod_start", d.levels.lod_start);
      read_key(s, "lod_end", d.levels.lod_end);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

int cmd_train_priors(const RunConfig& c, std::ostream& out) {
  if (c.shapes.empty()) throw ConfigError("train-priors needs a shape spec (--shapes)");
  const std::vector<ShapeSpec> specs = load_shape_specs(c.shapes);
  if (specs.empty()) throw ConfigError("shape spec contains no objects");

  ShapeTrainConfig sc;
  sc.network.hidden_layers = c.training.hidden_layers;
  sc.network.hidden_width = c.training.hidden_width;
  sc.d_sdf = c.training.d_sdf;
  sc.steps = c.training.shape_steps;
  sc.batch = c.training.batch;
  sc.lr_network = sc.lr_codes = c.training.lr;
  sc.seed = c.seed;
  ShapePriors shape = train_shape_priors(specs, sc);

  std::optional<TexturePriors> texture;
  if (c.training.texture) {
    TextureTrainConfig tc;
    tc.network.hidden_layers = c.training.hidden_layers;
    tc.network.hidden_width = c.training.hidden_width;
    tc.d_tex = c.training.d_tex;
    tc.steps = c.training.texture_steps;
    tc.batch = c.training.batch;
    tc.lr_network = tc.lr_codes = c.training.lr;
    tc.seed = c.seed + 1;
    texture = train_texture_priors(specs, shape.network, shape.codes, tc);
  }

  prepare_out(c);
  const Checkpoint ck = make_checkpoint(shape, texture ? &*texture : nullptr);
  save_checkpoint(ck, c.out / "priors.osdf");
  TrainLog log = shape.log;
  if (texture) log.rows.insert(log.rows.end(), texture->log.rows.begin(), texture->log.rows.end());
  write_text(c.out / "train_log.csv", log.to_csv());

  out << "checkpoint " << (c.out / "priors.osdf").string() << "\n";
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const double loss = evaluate_shape_loss(ck.shape, ck.latents.codes[i], specs[i], sc.delta, c.seed + 1000 + i);
    out << "object " << i << ' ' << specs[i].name << " held_out_loss " << fmt(loss) << "\n";
  }
  return kExitOk;
}

int cmd_extract(const RunConfig& c, std::ostream& out) {
  const Checkpoint ck = require_checkpoint(c);
  const LatentCode code = choose_code(c, ck);
  NetworkSdf sdf(ck.shape, code.shape);
  std::optional<NetworkColor> color;
  if (ck.texture) color.emplace(*ck.texture, code.shape, code.texture);
  const ColorField* cf = color ? &*color : nullptr;
  Extraction ex;
  if (c.grid_res > 0) {
    ex = extract_grid(sdf, cf, c.grid_res);
  } else {
    OctreeOptions o;
    o.lod_start = c.lod_start;
    o.lod_end = c.lod_end;
    ex = extract_octree(sdf, cf, o);
  }
  if (ex.cloud.size() == 0) throw EmptySurfaceError("extraction produced no surface points");

  prepare_out(c);
  write_ply(c.out / "surface.ply", PointCloud{ex.cloud.points, ex.cloud.normals, ex.cloud.colors});
  const auto report_path = c.out / "sampling_report.csv";
  const bool fresh = !std::filesystem::exists(report_path);
  std::ofstream report(report_path, std::ios::app);
  if (!report) throw Error("cannot open " + report_path.string());
  if (fresh) report << sampling_csv_header() << "\n";
  report << sampling_csv_row(ex.report, !c.deterministic) << "\n";

  out << sampling_csv_header() << "\n" << sampling_csv_row(ex.report, !c.deterministic) << "\n";
  return kExitOk;
}

int cmd_optimize(const RunConfig& c, std::ostream& out) {
  const Checkpoint ck = require_checkpoint(c);
  const LatentCode init = choose_code(c, ck);
  const Observation obs = load_observation(c);
  const Pose pose = c.pose.empty() ? Pose{} : read_pose(c.pose);
  pose.validate();
  const FieldNetwork* tex = ck.texture ? &*ck.texture : nullptr;

  const PointCloud before = camera_cloud(ck.shape, tex, init, pose, c.lod_start, c.lod_end);
  const JointResult r = joint_refine(ck.shape, tex, init, pose, obs, c.schedule);
  const FieldNetwork* tex_after = r.texture_network ? &*r.texture_network : tex;
  const PointCloud after = camera_cloud(ck.shape, tex_after, r.code, r.pose, c.lod_start, c.lod_end);

  json summary;
  summary["initial_chamfer"] = chamfer(before.points, obs.points);
  summary["final_chamfer"] = chamfer(after.points, obs.points);
  if (tex && obs.has_colors()) {
    const ExtractionLevels levels{c.lod_start, c.lod_end};
    summary["initial_psnr"] = psnr_from_mse(texture_mse(ck.shape, *tex, init.shape, init.texture, to_canonical(obs, pose), levels));
    summary["final_psnr"] =
        psnr_from_mse(texture_mse(ck.shape, *tex_after, r.code.shape, r.code.texture, to_canonical(obs, r.pose), levels));
  }
  summary["trace_rows"] = r.trace.rows.size();

  prepare_out(c);
  write_text(c.out / "trace.csv", r.trace.to_csv());
  write_ply(c.out / "before.ply", before);
  write_ply(c.out / "after.ply", after);
  write_pose(c.out / "pose.txt", r.pose, r.raw);
  write_text(c.out / "codes.json", code_json(r.code).dump(2) + "\n");
  write_text(c.out / "summary.json", summary.dump(2) + "\n");
  if (r.texture_network) {
    Checkpoint refined{ck.shape, *r.texture_network, LatentTable{ck.latents.d_sdf, ck.latents.d_tex, {r.code}}};
    save_checkpoint(refined, c.out / "refined.osdf");
  }

  for (const auto& [key, value] : summary.items())
    if (value.is_number_float()) out << key << ' ' << fmt(value.get<double>()) << "\n";
  return kExitOk;
}

int cmd_bench(const RunConfig& c, std::ostream& out) {
  std::unique_ptr<SdfField> sdf;
  std::unique_ptr<ColorField> color;
  std::optional<Checkpoint> ck;
  if (c.oracle) {
    ShapeSpec spec = ShapeSpec::sphere(0.3);
    if (!c.shapes.empty()) {
      const auto specs = load_shape_specs(c.shapes);
      if (c.object < 0 || static_cast<std::size_t>(c.object) >= specs.size()) throw ConfigError("object id out of range");
      spec = specs[static_cast<std::size_t>(c.object)];
    }
    sdf = std::make_unique<AnalyticSdf>(spec);
    color = std::make_unique<AnalyticColor>(spec);
  } else {
    ck = require_checkpoint(c);
    const LatentCode code = choose_code(c, *ck);
    sdf = std::make_unique<NetworkSdf>(ck->shape, code.shape);
    if (ck->texture) color = std::make_unique<NetworkColor>(*ck->texture, code.shape, code.texture);
  }
  auto configs = default_benchmark_configurations();
  for (auto& cfg : configs)
    if (cfg.grid_type == GridType::kOctree) cfg.lod_start = c.lod_start;
  const auto reports = benchmark_sampling(*sdf, color.get(), configs);

  prepare_out(c);
  std::ostringstream csv;
  csv << sampling_csv_header() << "\n";
  for (const auto& r : reports) csv << sampling_csv_row(r, true) << "\n";
  write_text(c.out / "bench.csv", csv.str());
  out << csv.str();
  return kExitOk;
}

int cmd_demo_detect(const RunConfig& c, std::ostream& out) {
  const SyntheticScene scene = c.scene.empty() ? random_scene(5, c.seed) : load_scene(c.scene);
  const DetectionReport report = run_detection(scene);
  prepare_out(c);
  write_text(c.out / "detections.csv", report.to_csv());
  out << "planted  center      detected    score   code_err  rot_err\n";
  char line[160];
  for (const auto& m : report.matches) {
    const auto& p = scene.objects[static_cast<std::size_t>(m.planted)];
    if (m.detected < 0) {
      std::snprintf(line, sizeof line, "%7d  (%3d,%3d)   missed\n", m.planted, p.center.x, p.center.y);
    } else {
      const auto& d = report.detections[static_cast<std::size_t>(m.detected)];
      std::snprintf(line, sizeof line, "%7d  (%3d,%3d)   (%3d,%3d)   %.3f   %.2e  %.2e\n", m.planted, p.center.x,
                    p.center.y, d.x, d.y, d.score, m.code_error, m.rotation_error);
    }
    out << line;
  }
  out << "detections " << report.detections.size() << "\n";
  out << "recovered " << report.recovered << "/" << report.planted << "\n";
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"osdf: object shape priors, octree extraction and refinement"};
  app.require_subcommand(1);
  struct Command {
    const char* name;
    const char* help;
    std::function<int(const RunConfig&, std::ostream&)> fn;
  };
  const std::vector<Command> commands = {
      {"train-priors", "Train shape and texture priors from a shape spec", cmd_train_priors},
      {"extract", "Extract a surface point cloud from a checkpoint", cmd_extract},
      {"optimize", "Refine codes and pose against an observation", cmd_optimize},
      {"bench", "Compare grid and octree sampling", cmd_bench},
      {"demo-detect", "Detection round-trip on a synthetic scene", cmd_demo_detect},
  };
  std::vector<Overrides> overrides(commands.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    subs.push_back(app.add_subcommand(commands[i].name, commands[i].help));
    add_flags(subs.back(), overrides[i]);
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const RunConfig config = resolve(commands[i].name, overrides[i]);
      const int threads = config.deterministic ? 1 : thread_cap();
      ScopedThreadCap cap(threads);
      return commands[i].fn(config, out);
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TrainingError& e) {
    err << "training diverged: " << e.what() << "\n";
    return kExitTraining;
  } catch (const EmptySurfaceError& e) {
    err << "empty surface: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const EmptyObservationError& e) {
    err << "empty observation: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}

}  // namespace osdf::cli
