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

#include <nlohmann/json.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "osdf/chamfer.hpp"
#include "osdf/checkpoint.hpp"
#include "osdf/ply.hpp"
#include "test_util.hpp"

namespace osdf::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// Value printed on a "key value" line of the command output.
double printed(const std::string& out, const std::string& key) {
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string k;
    double v;
    if (ls >> k && k == key && ls >> v) return v;
  }
  return std::nan("");
}

// Drops the time_s column of the sampling CSV.
std::string without_time(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  std::size_t column = std::string::npos;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    if (column == std::string::npos)
      column = static_cast<std::size_t>(std::find(fields.begin(), fields.end(), "time_s") - fields.begin());
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (i != column) out += fields[i] + ",";
    out += "\n";
  }
  return out;
}

constexpr const char* kSphereSpec = R"({"objects": [{"name": "ball", "kind": "sphere", "radius": 0.5,
  "color": {"type": "solid", "primary": [0.8, 0.3, 0.2]}}]})";

constexpr const char* kTrainConfig = R"({
  "seed": 4,
  "deterministic": true,
  "training": {"shape_steps": 2000, "texture_steps": 300, "batch": 2048,
               "hidden_layers": 3, "hidden_width": 64, "d_sdf": 16, "d_tex": 8}
})";

class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(test::temp_dir("cli"));
    write_file(*dir_ / "spec.json", kSphereSpec);
    write_file(*dir_ / "train.json", kTrainConfig);
    train_ = new CliResult(run_cli({"train-priors", "--config", (*dir_ / "train.json").string(), "--shapes",
                                    (*dir_ / "spec.json").string(), "--out", (*dir_ / "a").string()}));
  }
  static void TearDownTestSuite() {
    delete train_;
    delete dir_;
  }
  static fs::path checkpoint() { return *dir_ / "a" / "priors.osdf"; }
  static fs::path* dir_;
  static CliResult* train_;
};
fs::path* CliPipeline::dir_ = nullptr;
CliResult* CliPipeline::train_ = nullptr;

TEST_F(CliPipeline, TrainWritesLoadableCheckpoint) {
  ASSERT_EQ(train_->code, kExitOk) << train_->err;
  const Checkpoint ck = load_checkpoint(checkpoint());
  EXPECT_EQ(ck.latents.size(), 1u);
  EXPECT_EQ(ck.latents.d_sdf, 16);
  EXPECT_TRUE(ck.texture.has_value());
  const auto pos = train_->out.find("held_out_loss ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_LT(std::stod(train_->out.substr(pos + 14)), 0.01);
  const std::string log = slurp(*dir_ / "a" / "train_log.csv");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 1 + 2000 + 300);
}

TEST_F(CliPipeline, SameSeedGivesIdenticalArtifacts) {
  ASSERT_EQ(train_->code, kExitOk);
  const CliResult again = run_cli({"train-priors", "--config", (*dir_ / "train.json").string(), "--shapes",
                                   (*dir_ / "spec.json").string(), "--out", (*dir_ / "b").string()});
  ASSERT_EQ(again.code, kExitOk) << again.err;
  EXPECT_EQ(slurp(*dir_ / "b" / "priors.osdf"), slurp(checkpoint()));
  EXPECT_EQ(slurp(*dir_ / "b" / "train_log.csv"), slurp(*dir_ / "a" / "train_log.csv"));
  EXPECT_EQ(again.out.substr(again.out.find('\n')), train_->out.substr(train_->out.find('\n')));
}

TEST_F(CliPipeline, ExtractLod6OnSphere) {
  ASSERT_EQ(train_->code, kExitOk);
  const fs::path out = *dir_ / "ex6";
  const CliResult r = run_cli({"extract", "--checkpoint", checkpoint().string(), "--lod-start", "3", "--lod-end", "6",
                               "--deterministic", "--out", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const PointCloud cloud = read_ply(out / "surface.ply");
  ASSERT_GT(cloud.points.size(), 100u);
  EXPECT_EQ(cloud.colors.size(), cloud.points.size());
  for (const auto& p : cloud.points) EXPECT_LT(std::abs(p.norm() - 0.5), 0.02);
  Vec3 mean = Vec3::Zero();
  for (const auto& c : cloud.colors) mean += c;
  mean /= static_cast<double>(cloud.colors.size());
  EXPECT_LT((mean - Vec3(0.8, 0.3, 0.2)).cwiseAbs().maxCoeff(), 0.1);

  const std::string first_ply = slurp(out / "surface.ply");
  const std::string report = slurp(out / "sampling_report.csv");
  EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 2);
  const CliResult again = run_cli({"extract", "--checkpoint", checkpoint().string(), "--lod-end", "6",
                                   "--deterministic", "--out", out.string()});
  ASSERT_EQ(again.code, kExitOk);
  const std::string appended = slurp(out / "sampling_report.csv");
  EXPECT_EQ(std::count(appended.begin(), appended.end(), '\n'), 3);
  EXPECT_EQ(slurp(out / "surface.ply"), first_ply);
  EXPECT_EQ(again.out, r.out);
}

TEST_F(CliPipeline, CoarseExtractionHasFewerPoints) {
  ASSERT_EQ(train_->code, kExitOk);
  const CliResult fine = run_cli({"extract", "--checkpoint", checkpoint().string(), "--lod-end", "6", "--out",
                                  (*dir_ / "fine").string()});
  const CliResult coarse = run_cli({"extract", "--checkpoint", checkpoint().string(), "--lod-start", "3",
                                    "--lod-end", "3", "--out", (*dir_ / "coarse").string()});
  ASSERT_EQ(fine.code, kExitOk);
  ASSERT_EQ(coarse.code, kExitOk);
  const auto n_fine = read_ply(*dir_ / "fine" / "surface.ply").points.size();
  const auto n_coarse = read_ply(*dir_ / "coarse" / "surface.ply").points.size();
  EXPECT_GT(n_coarse, 0u);
  EXPECT_LT(n_coarse, n_fine);
}

TEST_F(CliPipeline, GridBaselineAgreesWithOctree) {
  ASSERT_EQ(train_->code, kExitOk);
  const CliResult grid = run_cli({"extract", "--checkpoint", checkpoint().string(), "--grid-res", "60", "--out",
                                  (*dir_ / "grid").string()});
  const CliResult oct = run_cli({"extract", "--checkpoint", checkpoint().string(), "--lod-end", "6", "--out",
                                 (*dir_ / "oct").string()});
  ASSERT_EQ(grid.code, kExitOk) << grid.err;
  ASSERT_EQ(oct.code, kExitOk);
  const auto a = read_ply(*dir_ / "grid" / "surface.ply").points;
  const auto b = read_ply(*dir_ / "oct" / "surface.ply").points;
  EXPECT_LT(chamfer(a, b), 0.05);
  EXPECT_NE(grid.out.find("216000"), std::string::npos);
}

PointCloud observed_sphere(double radius, const Vec3& offset, const Vec3& color, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PointCloud cloud;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 d = test::random_unit(rng);
    cloud.points.push_back(radius * d + offset);
    cloud.normals.push_back(d);
    cloud.colors.push_back(color);
  }
  return cloud;
}

TEST_F(CliPipeline, OptimizeZeroStepScheduleKeepsInputs) {
  ASSERT_EQ(train_->code, kExitOk);
  const fs::path out = *dir_ / "opt0";
  write_ply(*dir_ / "obs.ply", observed_sphere(0.45, Vec3(0.02, 0, 0), Vec3(0.5, 0.5, 0.5), 1500, 3));
  write_file(*dir_ / "zero.json", R"({"schedule": {"pose_steps": 0, "shape_steps": 0, "texture_steps": 0}})");
  const CliResult r = run_cli({"optimize", "--config", (*dir_ / "zero.json").string(), "--checkpoint",
                               checkpoint().string(), "--observation", (*dir_ / "obs.ply").string(), "--out",
                               out.string(), "--deterministic"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Checkpoint ck = load_checkpoint(checkpoint());
  const json codes = json::parse(slurp(out / "codes.json"));
  const auto shape = codes["shape"].get<std::vector<float>>();
  ASSERT_EQ(shape.size(), 16u);
  for (int i = 0; i < 16; ++i) EXPECT_EQ(shape[static_cast<std::size_t>(i)], ck.latents.codes[0].shape[i]);
  const Pose pose = read_pose(out / "pose.txt");
  EXPECT_EQ(pose.rotation, Mat3::Identity());
  EXPECT_EQ(pose.translation, Vec3::Zero());
  EXPECT_EQ(slurp(out / "before.ply"), slurp(out / "after.ply"));
  EXPECT_EQ(slurp(out / "trace.csv"), "step,stage,chamfer,color_mse,psnr\n");
  EXPECT_EQ(printed(r.out, "initial_chamfer"), printed(r.out, "final_chamfer"));
}

TEST_F(CliPipeline, OptimizeImprovesAndFineTuneHelpsTexture) {
  ASSERT_EQ(train_->code, kExitOk);
  write_ply(*dir_ / "obs2.ply", observed_sphere(0.5, Vec3(0.03, -0.02, 0.0), Vec3(0.3, 0.6, 0.4), 1500, 5));
  write_file(*dir_ / "sched.json",
             R"({"schedule": {"pose_steps": 40, "shape_steps": 20, "texture_steps": 100, "fine_tune_steps": 100,
                 "fine_tune_lr": 1e-3, "lod_start": 3, "lod_end": 5}})");
  auto opt = [&](const std::string& name, bool fine_tune) {
    std::vector<std::string> args{"optimize", "--config", (*dir_ / "sched.json").string(), "--checkpoint",
                                  checkpoint().string(), "--observation", (*dir_ / "obs2.ply").string(), "--out",
                                  (*dir_ / name).string(), "--deterministic"};
    if (fine_tune) args.push_back("--fine-tune");
    return run_cli(args);
  };
  const CliResult plain = opt("opt_plain", false);
  const CliResult tuned = opt("opt_tuned", true);
  ASSERT_EQ(plain.code, kExitOk) << plain.err;
  ASSERT_EQ(tuned.code, kExitOk) << tuned.err;
  EXPECT_LT(printed(plain.out, "final_chamfer"), printed(plain.out, "initial_chamfer"));
  EXPECT_GT(printed(plain.out, "final_psnr"), printed(plain.out, "initial_psnr"));
  EXPECT_GE(printed(tuned.out, "final_psnr"), printed(plain.out, "final_psnr"));
  EXPECT_TRUE(fs::exists(*dir_ / "opt_tuned" / "refined.osdf"));
  EXPECT_FALSE(fs::exists(*dir_ / "opt_plain" / "refined.osdf"));
  const std::string trace = slurp(*dir_ / "opt_tuned" / "trace.csv");
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 1 + 40 + 20 + 100 + 100);
  const Pose pose = read_pose(*dir_ / "opt_plain" / "pose.txt");
  EXPECT_LT((pose.translation - Vec3(0.03, -0.02, 0.0)).norm(), 0.02);

  const CliResult repeat = opt("opt_plain2", false);
  ASSERT_EQ(repeat.code, kExitOk);
  for (const char* f : {"trace.csv", "before.ply", "after.ply", "pose.txt", "codes.json", "summary.json"})
    EXPECT_EQ(slurp(*dir_ / "opt_plain2" / f), slurp(*dir_ / "opt_plain" / f)) << f;
}

TEST_F(CliPipeline, OptimizeFromDepthRasters) {
  ASSERT_EQ(train_->code, kExitOk);
  const Intrinsics k{200.0, 200.0, 32.0, 24.0};
  const DepthObservation d = render_sphere_depth(Vec3(0, 0, 2.0), 0.5, 48, 64, k);
  FeatureMap mask(48, 64, 1);
  for (std::size_t i = 0; i < d.mask.size(); ++i) mask.data[i] = d.mask[i];
  write_raster(*dir_ / "depth.osdm", d.depth, RasterType::kF32);
  write_raster(*dir_ / "mask.osdm", mask, RasterType::kU8);
  Pose init;
  init.translation = Vec3(0, 0, 1.95);
  write_pose(*dir_ / "init_pose.txt", init, {init.rotation});
  write_file(*dir_ / "depth.json", R"({"intrinsics": {"fx": 200, "fy": 200, "cx": 32, "cy": 24},
      "schedule": {"pose_steps": 30, "shape_steps": 0, "texture_steps": 0}})");
  const CliResult r = run_cli({"optimize", "--config", (*dir_ / "depth.json").string(), "--checkpoint",
                               checkpoint().string(), "--depth", (*dir_ / "depth.osdm").string(), "--mask",
                               (*dir_ / "mask.osdm").string(), "--pose", (*dir_ / "init_pose.txt").string(), "--out",
                               (*dir_ / "opt_depth").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_LE(printed(r.out, "final_chamfer"), printed(r.out, "initial_chamfer"));
}

TEST_F(CliPipeline, OptimizeEmptyObservationFails) {
  ASSERT_EQ(train_->code, kExitOk);
  write_ply(*dir_ / "empty.ply", PointCloud{});
  const CliResult r = run_cli({"optimize", "--checkpoint", checkpoint().string(), "--observation",
                               (*dir_ / "empty.ply").string(), "--out", (*dir_ / "opt_empty").string()});
  EXPECT_EQ(r.code, kExitEmpty);
  EXPECT_FALSE(r.err.empty());
  const CliResult none = run_cli({"optimize", "--checkpoint", checkpoint().string()});
  EXPECT_EQ(none.code, kExitConfig);
}

TEST_F(CliPipeline, BenchOnCheckpoint) {
  ASSERT_EQ(train_->code, kExitOk);
  const CliResult r = run_cli({"bench", "--checkpoint", checkpoint().string(), "--out", (*dir_ / "bench").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string csv = slurp(*dir_ / "bench" / "bench.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Cli, BenchOracleCountsAreReproducible) {
  const fs::path dir = test::temp_dir("cli_bench");
  const CliResult a = run_cli({"bench", "--oracle", "--out", (dir / "a").string()});
  const CliResult b = run_cli({"bench", "--oracle", "--out", (dir / "b").string()});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  ASSERT_EQ(b.code, kExitOk);
  const std::string csv = slurp(dir / "a" / "bench.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_NE(csv.find("216000"), std::string::npos);
  EXPECT_EQ(without_time(csv), without_time(slurp(dir / "b" / "bench.csv")));
}

TEST(Cli, DemoDetect) {
  const fs::path dir = test::temp_dir("cli_detect");
  const CliResult r = run_cli({"demo-detect", "--seed", "3", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("recovered 5/5"), std::string::npos);
  const std::string csv = slurp(dir / "detections.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);

  write_file(dir / "empty.json", R"({"objects": []})");
  const CliResult e = run_cli({"demo-detect", "--config", (dir / "none.json").string()});
  EXPECT_EQ(e.code, kExitConfig);
  const CliResult empty = run_cli({"demo-detect", "--scene", (dir / "empty.json").string(), "--out", dir.string()});
  ASSERT_EQ(empty.code, kExitOk) << empty.err;
  EXPECT_NE(empty.out.find("detections 0"), std::string::npos);
  EXPECT_NE(empty.out.find("recovered 0/0"), std::string::npos);

  SyntheticScene noisy = random_scene(5, 7, 0.05);
  write_file(dir / "noisy.json", dump_scene(noisy));
  const CliResult n = run_cli({"demo-detect", "--scene", (dir / "noisy.json").string(), "--out", dir.string()});
  ASSERT_EQ(n.code, kExitOk);
  const auto pos = n.out.find("recovered ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_GE(std::stoi(n.out.substr(pos + 10)), 4);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = test::temp_dir("cli_exit");
  EXPECT_EQ(run_cli({}).code, kExitConfig);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(run_cli({"extract", "--no-such-flag"}).code, kExitConfig);
  EXPECT_EQ(run_cli({"--help"}).code, kExitOk);
  EXPECT_EQ(run_cli({"train-priors"}).code, kExitConfig);
  write_file(dir / "empty_spec.json", R"({"objects": []})");
  EXPECT_EQ(run_cli({"train-priors", "--shapes", (dir / "empty_spec.json").string(), "--out", dir.string()}).code,
            kExitConfig);
  EXPECT_EQ(run_cli({"extract", "--checkpoint", (dir / "missing.osdf").string()}).code, kExitConfig);
  write_file(dir / "garbage.osdf", "not a checkpoint");
  EXPECT_EQ(run_cli({"extract", "--checkpoint", (dir / "garbage.osdf").string()}).code, kExitOther);
  write_file(dir / "bad.json", "{ nope");
  EXPECT_EQ(run_cli({"extract", "--config", (dir / "bad.json").string()}).code, kExitConfig);
  EXPECT_EQ(run_cli({"extract", "--lod-start", "5", "--lod-end", "4"}).code, kExitConfig);

  write_file(dir / "spec.json", kSphereSpec);
  const CliResult diverged = run_cli({"train-priors", "--shapes", (dir / "spec.json").string(), "--steps", "300",
                                      "--lr", "50", "--out", (dir / "div").string()});
  EXPECT_EQ(diverged.code, kExitTraining) << diverged.err;
  EXPECT_FALSE(fs::exists(dir / "div" / "priors.osdf"));
}

TEST(Cli, EmptySurfaceExitCode) {
  // A checkpoint whose SDF is positive everywhere.
  std::mt19937_64 rng(1);
  Checkpoint ck;
  ck.shape = make_sdf_network({2, 8, 30.0}, 4, rng);
  for (auto& l : ck.shape.mutable_layers()) {
    l.weight.setZero();
    l.bias.setZero();
  }
  ck.shape.mutable_layers().back().bias[0] = 1.0f;
  ck.latents = LatentTable{4, 0, {LatentCode{VectorX<float>::Zero(4), VectorX<float>(), 0}}};
  const fs::path dir = test::temp_dir("cli_empty_surface");
  save_checkpoint(ck, dir / "flat.osdf");
  const CliResult r = run_cli({"extract", "--checkpoint", (dir / "flat.osdf").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, kExitEmpty) << r.err;
  EXPECT_FALSE(fs::exists(dir / "surface.ply"));
}

TEST(Config, ParseAndDefaults) {
  const RunConfig d = parse_run_config("{}");
  EXPECT_EQ(d.lod_end, 6);
  EXPECT_EQ(d.schedule.shape_weight, 1.0);
  EXPECT_EQ(d.schedule.texture_weight, 0.3);
  EXPECT_EQ(d.schedule.fine_tune_lr, 1e-5);
  const RunConfig c = parse_run_config(R"({
    "command": "optimize", "checkpoint": "x.osdf", "seed": 9, "deterministic": true,
    "lod_start": 2, "lod_end": 7, "grid_res": 40, "object": 3, "category": 1, "label": 2,
    "intrinsics": {"fx": 100, "fy": 110, "cx": 5, "cy": 6},
    "training": {"shape_steps": 7, "hidden_width": 32, "texture": false},
    "schedule": {"rounds": 2, "pose_steps": 11, "shape_lr": 0.01, "fine_tune": true, "lod_end": 4}
  })");
  EXPECT_EQ(c.command, "optimize");
  EXPECT_EQ(c.checkpoint, "x.osdf");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_TRUE(c.deterministic);
  EXPECT_EQ(c.lod_start, 2);
  EXPECT_EQ(c.grid_res, 40);
  EXPECT_EQ(c.category, 1);
  EXPECT_EQ(c.intrinsics.fy, 110.0);
  EXPECT_EQ(c.training.shape_steps, 7);
  EXPECT_FALSE(c.training.texture);
  EXPECT_EQ(c.schedule.rounds, 2);
  EXPECT_EQ(c.schedule.pose_steps, 11);
  EXPECT_EQ(c.schedule.shape_lr, 0.01);
  EXPECT_TRUE(c.schedule.fine_tune);
  EXPECT_EQ(c.schedule.levels.lod_end, 4);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_run_config("[1, 2]"), ConfigError);
  EXPECT_THROW(parse_run_config("{"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"lod_start": "three"})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"lod_start": 4, "lod_end": 3})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"grid_res": 1})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"schedule": {"shape_steps": -1}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"schedule": {"texture_lr": 0}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"training": {"batch": 0}})"), ConfigError);
  EXPECT_THROW(load_run_config("/nonexistent/osdf/config.json"), ConfigError);
}

TEST(Config, FlagsOverrideFile) {
  const fs::path dir = test::temp_dir("cli_flags");
  write_file(dir / "c.json", R"({"seed": 1, "lod_end": 5, "out": "elsewhere"})");
  // demo-detect prints the seed-dependent scene, so two seeds give two reports.
  const CliResult a = run_cli({"demo-detect", "--config", (dir / "c.json").string(), "--seed", "11", "--out",
                               (dir / "a").string()});
  const CliResult b = run_cli({"demo-detect", "--config", (dir / "c.json").string(), "--out", (dir / "b").string()});
  const CliResult c = run_cli({"demo-detect", "--seed", "11", "--out", (dir / "c").string()});
  ASSERT_EQ(a.code, kExitOk);
  ASSERT_EQ(b.code, kExitOk);
  EXPECT_EQ(a.out, c.out);
  EXPECT_NE(a.out, b.out);
  EXPECT_TRUE(fs::exists(dir / "a" / "detections.csv"));
  EXPECT_FALSE(fs::exists(dir / "elsewhere"));
}

}  // namespace
}  // namespace osdf::cli
