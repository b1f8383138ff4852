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

#include "osdf/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "osdf/chamfer.hpp"

namespace osdf {
namespace {

constexpr std::size_t kChunk = 8192;

OctreeOptions octree_options(const ExtractionLevels& levels) {
  OctreeOptions o;
  o.lod_start = levels.lod_start;
  o.lod_end = levels.lod_end;
  return o;
}

SurfacePointCloud extract_surface(const FieldNetwork& shape_net, const VectorX<float>& code,
                                  const ExtractionLevels& levels) {
  NetworkSdf field(shape_net, code);
  Extraction ex = extract_octree(field, nullptr, octree_options(levels));
  if (ex.cloud.size() == 0) throw EmptySurfaceError("extraction produced no surface points");
  return std::move(ex.cloud);
}

void adam_update(AdamState<float>& state, VectorX<float>& target, const VectorX<float>& grad) {
  adam_step<float>(state, {target.data(), static_cast<std::size_t>(target.size())},
                   {grad.data(), static_cast<std::size_t>(grad.size())});
}

VectorX<float> texture_tail(const VectorX<float>& shape_code, const VectorX<float>& texture_code) {
  VectorX<float> tail(shape_code.size() + texture_code.size());
  tail << shape_code, texture_code;
  return tail;
}

// Observed point j is paired with the surface point nearest to it.
struct ColorMatch {
  std::vector<Vec3> surface;
  std::vector<Vec3> targets;
};

ColorMatch match_colors(const FieldNetwork& shape_net, const VectorX<float>& shape_code,
                        const Observation& observation, const ExtractionLevels& levels) {
  if (!observation.has_colors()) throw ConfigError("texture optimization needs observed colors");
  observation.validate();
  const SurfacePointCloud cloud = extract_surface(shape_net, shape_code, levels);
  const NearestNeighbors nn = nearest_neighbors(observation.points, cloud.points);
  ColorMatch m;
  m.surface.reserve(observation.points.size());
  for (std::size_t j = 0; j < observation.points.size(); ++j) m.surface.push_back(cloud.points[nn.index[j]]);
  m.targets = observation.colors;
  return m;
}

// MSE over channels; optionally accumulates weight * d MSE into the latent
// tail gradient and the parameter tape.
double color_loss(const FieldNetwork& net, const VectorX<float>& tail, const ColorMatch& match, double weight,
                  VectorX<float>* tail_grad, GradientTape<float>* tape) {
  const std::size_t n = match.surface.size();
  const double scale = weight * 2.0 / (3.0 * static_cast<double>(n));
  if (tail_grad) *tail_grad = VectorX<float>::Zero(tail.size());
  double sum = 0.0;
  ForwardCache<float> cache;
  for (std::size_t begin = 0; begin < n; begin += kChunk) {
    const std::size_t m = std::min(kChunk, n - begin);
    const Matrix3X<float> x = detail::pack_points<float>(std::span(match.surface).subspan(begin, m));
    const bool need_grad = tail_grad || tape;
    const MatrixX<float> pred = forward_block<float>(net, x, tail, need_grad ? &cache : nullptr);
    MatrixX<float> cot(3, static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      const Vec3 d = pred.col(c).cast<double>() - match.targets[begin + i];
      sum += d.squaredNorm();
      cot.col(c) = (scale * d).cast<float>();
    }
    if (!need_grad) continue;
    VectorX<float> g;
    backward_block<float>(net, cache, tail, cot, tape, nullptr, tail_grad ? &g : nullptr);
    if (tail_grad) *tail_grad += g;
  }
  return sum / (3.0 * static_cast<double>(n));
}

std::string format_field(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void Observation::validate() const {
  if (points.empty()) throw EmptyObservationError("observation has no points");
  if (!colors.empty() && colors.size() != points.size()) throw ConfigError("observation color count mismatch");
  for (const Vec3& p : points)
    if (!p.allFinite()) throw ConfigError("observation contains non-finite points");
  for (const Vec3& c : colors)
    if (!c.allFinite()) throw ConfigError("observation contains non-finite colors");
}

Observation to_canonical(const Observation& camera, const Pose& pose) {
  Observation out;
  out.colors = camera.colors;
  out.points.reserve(camera.points.size());
  for (const Vec3& y : camera.points) out.points.push_back(pose.inverse_apply(y));
  return out;
}

double psnr_from_mse(double mse) {
  if (!(mse > 0.0)) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

double psnr(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  if (pred.size() != gt.size() || pred.empty()) throw ConfigError("psnr: color sets must be nonempty and equal-sized");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - gt[i]).squaredNorm();
  return psnr_from_mse(sum / (3.0 * static_cast<double>(pred.size())));
}

void Trace::append(const Trace& other) {
  const int offset = rows.empty() ? 0 : rows.back().step + 1;
  for (TraceRow r : other.rows) {
    r.step += offset;
    rows.push_back(std::move(r));
  }
}

std::vector<double> Trace::best_chamfer() const {
  std::vector<double> out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (!std::isnan(r.chamfer)) best = std::min(best, r.chamfer);
    out.push_back(best);
  }
  return out;
}

std::string Trace::to_csv() const {
  std::ostringstream os;
  os << "step,stage,chamfer,color_mse,psnr\n";
  for (const auto& r : rows)
    os << r.step << ',' << r.stage << ',' << format_field(r.chamfer) << ',' << format_field(r.color_mse) << ','
       << format_field(r.psnr) << '\n';
  return os.str();
}

ShapeGradient shape_chamfer_gradient(const FieldNetwork& shape_net, const VectorX<float>& code,
                                     std::span<const Vec3> target, const ExtractionLevels& levels) {
  const SurfacePointCloud cloud = extract_surface(shape_net, code, levels);
  const ChamferGradient cg = chamfer_with_gradient(cloud.points, target);
  ShapeGradient out;
  out.chamfer = cg.value;
  out.surface_points = cloud.size();
  out.gradient = VectorX<float>::Zero(code.size());
  // p = x - n s with n locally constant in the code for a ReLU network, so
  // dL/ds = -n . dL/dp.
  ForwardCache<float> cache;
  for (std::size_t begin = 0; begin < cloud.size(); begin += kChunk) {
    const std::size_t m = std::min(kChunk, cloud.size() - begin);
    const Matrix3X<float> x = detail::pack_points<float>(std::span(cloud.sources).subspan(begin, m));
    forward_block<float>(shape_net, x, code, &cache);
    MatrixX<float> cot(1, static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i)
      cot(0, static_cast<Eigen::Index>(i)) = static_cast<float>(-cloud.normals[begin + i].dot(cg.grad_a[begin + i]));
    VectorX<float> g;
    backward_block<float>(shape_net, cache, code, cot, nullptr, nullptr, &g);
    out.gradient += g;
  }
  return out;
}

ShapeResult optimize_shape(const FieldNetwork& shape_net, const VectorX<float>& init, const Observation& observation,
                           const ShapeOptimizeOptions& options) {
  if (options.steps < 0) throw ConfigError("optimize_shape: steps must be >= 0");
  observation.validate();
  if (init.size() != shape_net.d_sdf()) throw ConfigError("optimize_shape: code size mismatch");
  ShapeResult result;
  result.code = init;
  VectorX<float> code = init;
  AdamState<float> adam(code.size(), options.lr);
  double best = std::numeric_limits<double>::infinity();
  for (int step = 0; step < options.steps; ++step) {
    ShapeGradient sg;
    try {
      sg = shape_chamfer_gradient(shape_net, code, observation.points, options.levels);
    } catch (const EmptySurfaceError&) {
      if (step == 0) throw;
      result.aborted = true;
      break;
    }
    if (step == 0) result.initial_chamfer = sg.chamfer;
    result.trace.rows.push_back({step, "shape", sg.chamfer});
    if (sg.chamfer < best) {
      best = sg.chamfer;
      result.code = code;
    }
    VectorX<float> grad = sg.gradient * static_cast<float>(options.weight);
    adam_update(adam, code, grad);
  }
  result.best_chamfer = options.steps > 0 ? best : 0.0;
  return result;
}

double texture_mse(const FieldNetwork& shape_net, const FieldNetwork& texture_net, const VectorX<float>& shape_code,
                   const VectorX<float>& texture_code, const Observation& observation,
                   const ExtractionLevels& levels) {
  const ColorMatch match = match_colors(shape_net, shape_code, observation, levels);
  return color_loss(texture_net, texture_tail(shape_code, texture_code), match, 1.0, nullptr, nullptr);
}

TextureResult optimize_texture(const FieldNetwork& shape_net, const FieldNetwork& texture_net,
                               const VectorX<float>& shape_code, const VectorX<float>& texture_init,
                               const Observation& observation, const TextureOptimizeOptions& options) {
  if (texture_net.kind() != FieldKind::kTexture) throw ConfigError("optimize_texture: not a texture network");
  if (texture_init.size() != texture_net.d_tex() || shape_code.size() != texture_net.d_sdf())
    throw ConfigError("optimize_texture: code size mismatch");
  if (options.steps < 0 || options.fine_tune_steps < 0) throw ConfigError("optimize_texture: negative step count");
  const ColorMatch match = match_colors(shape_net, shape_code, observation, options.levels);

  TextureResult result;
  VectorX<float> tail = texture_tail(shape_code, texture_init);
  result.initial_mse = color_loss(texture_net, tail, match, 1.0, nullptr, nullptr);
  result.texture_code = texture_init;
  double best = result.initial_mse;

  VectorX<float> code = texture_init;
  AdamState<float> adam(code.size(), options.lr);
  int step = 0;
  auto track = [&](double mse, const char* stage) {
    result.trace.rows.push_back({step++, stage, std::numeric_limits<double>::quiet_NaN(), mse, psnr_from_mse(mse)});
  };
  for (int i = 0; i < options.steps; ++i) {
    VectorX<float> tail_grad;
    tail = texture_tail(shape_code, code);
    const double mse = color_loss(texture_net, tail, match, options.weight, &tail_grad, nullptr);
    track(mse, "texture");
    if (mse < best) {
      best = mse;
      result.texture_code = code;
    }
    VectorX<float> g = tail_grad.tail(code.size());
    adam_update(adam, code, g);
  }
  if (options.steps > 0) {
    // The last update has not been scored yet.
    const double mse = color_loss(texture_net, texture_tail(shape_code, code), match, 1.0, nullptr, nullptr);
    if (mse < best) {
      best = mse;
      result.texture_code = code;
    }
  }
  result.optimized_mse = best;
  result.fine_tuned_mse = best;
  if (!options.fine_tune || options.fine_tune_steps == 0) return result;

  // Fine-tuning continues from the best code on a private copy of the net.
  FieldNetwork net = texture_net;
  code = result.texture_code;
  NetworkAdam<float> net_adam(net, options.fine_tune_lr);
  GradientTape<float> tape = make_tape(net);
  FieldNetwork best_net = net;
  for (int i = 0; i <= options.fine_tune_steps; ++i) {
    tape.zero();
    VectorX<float> tail_grad;
    tail = texture_tail(shape_code, code);
    const bool last = i == options.fine_tune_steps;
    const double mse = color_loss(net, tail, match, options.weight, last ? nullptr : &tail_grad, last ? nullptr : &tape);
    if (mse < best) {
      best = mse;
      result.texture_code = code;
      best_net = net;
    }
    if (last) break;
    track(mse, "fine_tune");
    VectorX<float> g = tail_grad.tail(code.size());
    adam_update(adam, code, g);
    net_adam.step(net, tape);
  }
  result.fine_tuned_mse = best;
  result.network = std::move(best_net);
  return result;
}

PoseResult optimize_pose(std::span<const Vec3> canonical_points, const Pose& init, const Observation& observation,
                         const PoseOptimizeOptions& options) {
  if (options.steps < 0) throw ConfigError("optimize_pose: steps must be >= 0");
  if (canonical_points.empty()) throw EmptySurfaceError("optimize_pose: no canonical surface points");
  observation.validate();
  init.validate();

  PoseResult result;
  result.pose = init;
  result.raw.raw = init.rotation;
  Eigen::Matrix<double, 13, 1> params;
  for (int i = 0; i < 9; ++i) params[i] = init.rotation(i / 3, i % 3);
  params.segment<3>(9) = init.translation;
  params[12] = std::log(init.scale);
  AdamState<double> adam(13, options.lr);

  std::vector<Vec3> rotated(canonical_points.size()), moved(canonical_points.size());
  double best = std::numeric_limits<double>::infinity();
  for (int step = 0; step < options.steps; ++step) {
    RotationParam9 raw;
    for (int i = 0; i < 9; ++i) raw.raw(i / 3, i % 3) = params[i];
    Mat3 r;
    try {
      r = rot9_to_so3(raw);
    } catch (const DegenerateRotationError&) {
      result.aborted = true;
      break;
    }
    const double s = std::exp(params[12]);
    const Vec3 t = params.segment<3>(9);
    for (std::size_t i = 0; i < canonical_points.size(); ++i) {
      rotated[i] = r * canonical_points[i];
      moved[i] = s * rotated[i] + t;
    }
    const ChamferGradient cg = chamfer_with_gradient(moved, observation.points);
    if (step == 0) result.initial_chamfer = cg.value;
    result.trace.rows.push_back({step, "pose", cg.value});
    if (cg.value < best) {
      best = cg.value;
      result.pose.rotation = r;
      result.pose.translation = t;
      result.pose.scale = s;
      result.raw = raw;
    }
    Mat3 g_r = Mat3::Zero();
    Vec3 g_t = Vec3::Zero();
    double g_log_s = 0.0;
    for (std::size_t i = 0; i < canonical_points.size(); ++i) {
      const Vec3& g = cg.grad_a[i];
      g_r.noalias() += s * g * canonical_points[i].transpose();
      g_t += g;
      g_log_s += s * g.dot(rotated[i]);
    }
    const Mat3 g_raw = rot9_to_so3_vjp(raw, g_r);
    Eigen::Matrix<double, 13, 1> grad;
    for (int i = 0; i < 9; ++i) grad[i] = g_raw(i / 3, i % 3);
    grad.segment<3>(9) = g_t;
    grad[12] = g_log_s;
    adam_step<double>(adam, {params.data(), 13}, {grad.data(), 13});
  }
  result.best_chamfer = options.steps > 0 ? best : 0.0;
  return result;
}

PoseResult optimize_pose(const FieldNetwork& shape_net, const VectorX<float>& shape_code, const Pose& init,
                         const Observation& observation, const PoseOptimizeOptions& options) {
  const SurfacePointCloud cloud = extract_surface(shape_net, shape_code, options.levels);
  return optimize_pose(cloud.points, init, observation, options);
}

int JointSchedule::total_steps() const {
  const int per_round = pose_steps + shape_steps + texture_steps + (fine_tune ? fine_tune_steps : 0);
  return rounds * per_round;
}

double adaptive_lr_scale(std::size_t observed_points, std::size_t reference_points) {
  if (reference_points == 0) return 1.0;
  const double fraction = static_cast<double>(observed_points) / static_cast<double>(reference_points);
  return std::clamp(fraction, 0.25, 1.0);
}

JointResult joint_refine(const FieldNetwork& shape_net, const FieldNetwork* texture_net, const LatentCode& init,
                         const Pose& pose, const Observation& observation, const JointSchedule& schedule) {
  if (schedule.rounds < 0 || schedule.pose_steps < 0 || schedule.shape_steps < 0 || schedule.texture_steps < 0 ||
      schedule.fine_tune_steps < 0)
    throw ConfigError("joint_refine: negative schedule entry");
  JointResult result;
  result.code = init;
  result.pose = pose;
  result.raw.raw = pose.rotation;
  if (schedule.total_steps() == 0) return result;
  observation.validate();
  pose.validate();

  const double lr_scale = adaptive_lr_scale(observation.points.size(), schedule.reference_points);
  const bool do_texture = texture_net && observation.has_colors();
  for (int round = 0; round < schedule.rounds; ++round) {
    if (schedule.pose_steps > 0) {
      PoseOptimizeOptions o;
      o.steps = schedule.pose_steps;
      o.lr = schedule.pose_lr * lr_scale;
      o.levels = schedule.levels;
      PoseResult r = optimize_pose(shape_net, result.code.shape, result.pose, observation, o);
      result.pose = r.pose;
      result.raw = r.raw;
      result.trace.append(r.trace);
    }
    if (schedule.shape_steps > 0) {
      ShapeOptimizeOptions o;
      o.steps = schedule.shape_steps;
      o.lr = schedule.shape_lr * lr_scale;
      o.weight = schedule.shape_weight;
      o.levels = schedule.levels;
      ShapeResult r = optimize_shape(shape_net, result.code.shape, to_canonical(observation, result.pose), o);
      result.code.shape = r.code;
      result.trace.append(r.trace);
    }
    if (do_texture && (schedule.texture_steps > 0 || schedule.fine_tune)) {
      TextureOptimizeOptions o;
      o.steps = schedule.texture_steps;
      o.lr = schedule.texture_lr * lr_scale;
      o.weight = schedule.texture_weight;
      o.fine_tune = schedule.fine_tune;
      o.fine_tune_steps = schedule.fine_tune_steps;
      o.fine_tune_lr = schedule.fine_tune_lr;
      o.levels = schedule.levels;
      const FieldNetwork& net = result.texture_network ? *result.texture_network : *texture_net;
      TextureResult r = optimize_texture(shape_net, net, result.code.shape, result.code.texture,
                                         to_canonical(observation, result.pose), o);
      result.code.texture = r.texture_code;
      if (r.network) result.texture_network = std::move(r.network);
      result.trace.append(r.trace);
    }
  }
  return result;
}

}  // namespace osdf
