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

#include "osdf/priors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace osdf {
namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Vec3 project_to_surface(const ShapeSpec& spec, Vec3 p) {
  for (int it = 0; it < 8; ++it) {
    const double s = analytic_sdf(spec, p);
    if (std::abs(s) < 1e-12) break;
    Vec3 g = analytic_sdf_gradient(spec, p);
    const double gn = g.norm();
    if (gn < 1e-12) break;
    p -= g / gn * s;
  }
  return p;
}

double clamp_delta(double v, double delta) { return std::min(delta, std::max(-delta, v)); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

VectorX<float> random_code(int dim, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, stddev);
  VectorX<float> v(dim);
  for (int i = 0; i < dim; ++i) v[i] = static_cast<float>(n(rng));
  return v;
}

// Per-object sample pools packed for batched gathering.
struct Pool {
  Matrix3X<float> points;
  VectorX<float> sdf;
  Matrix3X<float> color;
};

Pool make_pool(const std::vector<TrainingSample>& samples, bool color_only) {
  std::vector<const TrainingSample*> keep;
  for (const auto& s : samples)
    if (!color_only || s.has_color) keep.push_back(&s);
  Pool pool;
  const auto n = static_cast<Eigen::Index>(keep.size());
  pool.points.resize(3, n);
  pool.sdf.resize(n);
  pool.color.resize(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    pool.points.col(i) = keep[static_cast<std::size_t>(i)]->point.cast<float>();
    pool.sdf[i] = static_cast<float>(keep[static_cast<std::size_t>(i)]->sdf_gt);
    pool.color.col(i) = keep[static_cast<std::size_t>(i)]->color_gt.cast<float>();
  }
  return pool;
}

std::vector<Pool> make_pools(const std::vector<ShapeSpec>& specs, const SampleCounts& counts, std::uint64_t seed,
                             bool color_only) {
  std::vector<Pool> pools(specs.size());
  parallel_for(
      specs.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
          pools[i] = make_pool(sample_training_points(specs[i], counts, mix_seed(seed, i), static_cast<int>(i)),
                               color_only);
      },
      1);
  for (std::size_t i = 0; i < pools.size(); ++i)
    if (pools[i].points.cols() == 0) throw TrainingError("object " + specs[i].name + " produced no training samples");
  return pools;
}

std::vector<int> split_batch(int batch, std::size_t objects) {
  std::vector<int> sizes(objects, batch / static_cast<int>(objects));
  for (int i = 0; i < batch % static_cast<int>(objects); ++i) ++sizes[static_cast<std::size_t>(i)];
  for (auto& s : sizes) s = std::max(s, 1);
  return sizes;
}

void divergence_check(double total, double initial, int step, int& streak, const char* stage) {
  if (!std::isfinite(total))
    throw TrainingError(std::string(stage) + " training diverged: non-finite loss at step " + std::to_string(step));
  if (total > 10.0 * initial) {
    if (++streak >= 100)
      throw TrainingError(std::string(stage) + " training diverged: loss " + fmt(total) + " stayed above 10x the initial " +
                          fmt(initial) + " for 100 steps (step " + std::to_string(step) + ")");
  } else {
    streak = 0;
  }
}

}  // namespace

std::vector<TrainingSample> sample_training_points(const ShapeSpec& spec, const SampleCounts& counts,
                                                   std::uint64_t seed, int object_id) {
  validate(spec);
  if (counts.surface < 0 || counts.near < 0 || counts.uniform < 0 || counts.surface + counts.near + counts.uniform == 0)
    throw ConfigError("sample counts must be non-negative and not all zero");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> cube(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, counts.near_sigma);

  auto label = [&](const Vec3& p) {
    TrainingSample s;
    s.point = p;
    s.sdf_gt = analytic_sdf(spec, p);
    s.object_id = object_id;
    if (std::abs(s.sdf_gt) < kColorBand) {
      s.has_color = true;
      s.color_gt = analytic_color(spec, p);
    }
    return s;
  };

  std::vector<Vec3> surface;
  const int needed = std::max(counts.surface, counts.near > 0 ? 1 : 0);
  surface.reserve(static_cast<std::size_t>(needed));
  constexpr double kBand = 0.1;
  std::size_t attempts = 0;
  while (static_cast<int>(surface.size()) < needed) {
    if (++attempts > 200000000) throw ConfigError("shape " + spec.name + " has no surface inside [-1,1]^3");
    Vec3 p(cube(rng), cube(rng), cube(rng));
    if (std::abs(analytic_sdf(spec, p)) >= kBand) continue;
    surface.push_back(project_to_surface(spec, p));
  }

  std::vector<TrainingSample> out;
  out.reserve(static_cast<std::size_t>(counts.surface + counts.near + counts.uniform));
  for (int i = 0; i < counts.surface; ++i) out.push_back(label(surface[static_cast<std::size_t>(i)]));
  for (int i = 0; i < counts.near; ++i) {
    const Vec3& base = surface[static_cast<std::size_t>(i) % surface.size()];
    Vec3 p = base + Vec3(noise(rng), noise(rng), noise(rng));
    out.push_back(label(p.cwiseMax(-1.0).cwiseMin(1.0)));
  }
  for (int i = 0; i < counts.uniform; ++i) out.push_back(label(Vec3(cube(rng), cube(rng), cube(rng))));
  return out;
}

double loss_sdf(std::span<const double> pred, std::span<const double> gt, double delta) {
  if (pred.size() != gt.size()) throw ConfigError("loss_sdf: length mismatch");
  if (!(delta > 0.0)) throw ConfigError("loss_sdf: delta must be positive");
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(clamp_delta(pred[i], delta) - clamp_delta(gt[i], delta));
  return sum / static_cast<double>(pred.size());
}

std::vector<double> loss_sdf_gradient(std::span<const double> pred, std::span<const double> gt, double delta) {
  if (pred.size() != gt.size()) throw ConfigError("loss_sdf: length mismatch");
  std::vector<double> g(pred.size(), 0.0);
  const double inv = pred.empty() ? 0.0 : 1.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (std::abs(pred[i]) >= delta) continue;
    const double d = pred[i] - clamp_delta(gt[i], delta);
    g[i] = d > 0.0 ? inv : (d < 0.0 ? -inv : 0.0);
  }
  return g;
}

ContrastiveResult loss_contrastive(const std::vector<VectorX<double>>& codes, std::span<const int> labels,
                                   const ContrastiveMargins& margins) {
  if (codes.size() < 2) throw ConfigError("loss_contrastive needs at least two codes");
  if (labels.size() != codes.size()) throw ConfigError("loss_contrastive: one label per code");
  if (!(margins.positive > margins.negative) || margins.positive >= 1.0 || margins.negative <= -1.0)
    throw ConfigError("loss_contrastive: margins must satisfy -1 < m_neg < m_pos < 1");
  ContrastiveResult r;
  r.gradients.assign(codes.size(), VectorX<double>::Zero(codes.front().size()));
  std::size_t same = 0, cross = 0;
  for (std::size_t i = 0; i < codes.size(); ++i)
    for (std::size_t j = i + 1; j < codes.size(); ++j) (labels[i] == labels[j] ? same : cross)++;

  for (std::size_t i = 0; i < codes.size(); ++i) {
    for (std::size_t j = i + 1; j < codes.size(); ++j) {
      const auto& a = codes[i];
      const auto& b = codes[j];
      const double na = std::max(a.norm(), 1e-12);
      const double nb = std::max(b.norm(), 1e-12);
      const double cos = a.dot(b) / (na * nb);
      const bool positive = labels[i] == labels[j];
      const double hinge = positive ? margins.positive - cos : cos - margins.negative;
      if (hinge <= 0.0) continue;
      const double weight = 1.0 / static_cast<double>(positive ? same : cross);
      const double sign = positive ? -1.0 : 1.0;
      (positive ? r.positive_term : r.negative_term) += weight * hinge;
      r.gradients[i] += sign * weight * (b / (na * nb) - cos * a / (na * na));
      r.gradients[j] += sign * weight * (a / (na * nb) - cos * b / (nb * nb));
    }
  }
  r.value = r.positive_term + r.negative_term;
  return r;
}

double loss_rgb(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  if (pred.size() != gt.size()) throw ConfigError("loss_rgb: length mismatch");
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - gt[i]).squaredNorm();
  return sum / (3.0 * static_cast<double>(pred.size()));
}

double TrainLog::ema_total(int step, double alpha) const {
  double ema = 0.0;
  bool first = true;
  for (const auto& r : rows) {
    if (r.step > step) break;
    const double total = r.loss_sdf + r.loss_contrastive + r.loss_rgb;
    ema = first ? total : (1.0 - alpha) * ema + alpha * total;
    first = false;
  }
  return ema;
}

std::string TrainLog::to_csv() const {
  std::ostringstream os;
  os << "step,loss_sdf,loss_contrastive,loss_rgb\n";
  for (const auto& r : rows) {
    os << r.step << ',';
    if (r.has_shape) os << fmt(r.loss_sdf) << ',' << fmt(r.loss_contrastive);
    else os << ',';
    os << ',';
    if (r.has_rgb) os << fmt(r.loss_rgb);
    os << '\n';
  }
  return os.str();
}

ShapePriors train_shape_priors(const std::vector<ShapeSpec>& specs, const ShapeTrainConfig& config) {
  if (specs.empty()) throw ConfigError("train_shape_priors: no shapes given");
  if (config.steps < 1 || config.batch < 1 || config.d_sdf < 1) throw ConfigError("train_shape_priors: bad config");
  for (const auto& s : specs) validate(s);

  std::mt19937_64 rng(config.seed);
  ShapePriors out;
  out.network = make_sdf_network(config.network, config.d_sdf, rng);
  out.codes.resize(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    out.codes[i].shape = random_code(config.d_sdf, config.code_init_std, rng);
    out.codes[i].category = specs[i].category;
  }
  const std::vector<Pool> pools = make_pools(specs, config.samples, mix_seed(config.seed, 7777), false);
  const std::vector<int> sizes = split_batch(config.batch, specs.size());
  int total_batch = 0;
  for (int s : sizes) total_batch += s;

  NetworkAdam<float> net_adam(out.network, config.lr_network);
  std::vector<AdamState<float>> code_adam;
  for (std::size_t i = 0; i < specs.size(); ++i) code_adam.emplace_back(config.d_sdf, config.lr_codes);

  std::vector<int> labels;
  for (const auto& s : specs) labels.push_back(s.category);
  const bool use_contrastive = specs.size() >= 2 && config.contrastive_weight != 0.0;
  const float delta = static_cast<float>(config.delta);
  const float inv_batch = 1.0f / static_cast<float>(total_batch);

  double initial = 0.0;
  int streak = 0;
  GradientTape<float> tape = make_tape(out.network);
  std::vector<VectorX<float>> code_grads(specs.size());

  for (int step = 1; step <= config.steps; ++step) {
    tape.zero();
    double l1_sum = 0.0;
    for (std::size_t o = 0; o < specs.size(); ++o) {
      const Pool& pool = pools[o];
      const int n = sizes[o];
      std::uniform_int_distribution<Eigen::Index> pick(0, pool.points.cols() - 1);
      Matrix3X<float> x(3, n);
      VectorX<float> gt(n);
      for (int k = 0; k < n; ++k) {
        const Eigen::Index idx = pick(rng);
        x.col(k) = pool.points.col(idx);
        gt[k] = pool.sdf[idx];
      }
      ForwardCache<float> cache;
      const MatrixX<float> pred = forward_block(out.network, x, out.codes[o].shape, &cache);
      MatrixX<float> cot(1, n);
      for (int k = 0; k < n; ++k) {
        const float p = pred(0, k);
        const float g = std::clamp(gt[k], -delta, delta);
        const float d = std::clamp(p, -delta, delta) - g;
        l1_sum += std::abs(d);
        cot(0, k) = (std::abs(p) < delta && d != 0.0f) ? (d > 0.0f ? inv_batch : -inv_batch) : 0.0f;
      }
      backward_block<float>(out.network, cache, out.codes[o].shape, cot, &tape, nullptr, &code_grads[o]);
    }
    const double l1 = l1_sum / total_batch;

    double contrastive = 0.0;
    if (use_contrastive) {
      std::vector<VectorX<double>> codes;
      for (const auto& c : out.codes) codes.push_back(c.shape.cast<double>());
      ContrastiveResult cr = loss_contrastive(codes, labels, config.margins);
      contrastive = cr.value;
      for (std::size_t o = 0; o < specs.size(); ++o)
        code_grads[o] += (config.contrastive_weight * cr.gradients[o]).cast<float>();
    }

    const double total = l1 + config.contrastive_weight * contrastive;
    if (step == 1) initial = std::max(total, 1e-12);
    divergence_check(total, initial, step, streak, "shape");

    net_adam.step(out.network, tape);
    for (std::size_t o = 0; o < specs.size(); ++o)
      adam_step<float>(code_adam[o], {out.codes[o].shape.data(), static_cast<std::size_t>(config.d_sdf)},
                       {code_grads[o].data(), static_cast<std::size_t>(config.d_sdf)});

    TrainLogRow row;
    row.step = step;
    row.loss_sdf = l1;
    row.loss_contrastive = contrastive;
    out.log.rows.push_back(row);
  }
  return out;
}

TexturePriors train_texture_priors(const std::vector<ShapeSpec>& specs, const FieldNetwork& shape_network,
                                   const std::vector<LatentCode>& shape_codes, const TextureTrainConfig& config) {
  if (specs.empty()) throw ConfigError("train_texture_priors: no shapes given");
  if (shape_codes.size() != specs.size()) throw ConfigError("train_texture_priors: one shape code per spec required");
  if (config.steps < 1 || config.batch < 1 || config.d_tex < 1) throw ConfigError("train_texture_priors: bad config");
  const int d_sdf = shape_network.d_sdf();
  for (const auto& c : shape_codes)
    if (c.shape.size() != d_sdf) throw ConfigError("train_texture_priors: shape code dimension mismatch");

  std::mt19937_64 rng(config.seed);
  TexturePriors out;
  out.network = make_texture_network(config.network, d_sdf, config.d_tex, rng);
  for (std::size_t i = 0; i < specs.size(); ++i) out.codes.push_back(random_code(config.d_tex, config.code_init_std, rng));
  const std::vector<Pool> pools = make_pools(specs, config.samples, mix_seed(config.seed, 9191), true);
  const std::vector<int> sizes = split_batch(config.batch, specs.size());
  int total_batch = 0;
  for (int s : sizes) total_batch += s;

  NetworkAdam<float> net_adam(out.network, config.lr_network);
  std::vector<AdamState<float>> code_adam;
  for (std::size_t i = 0; i < specs.size(); ++i) code_adam.emplace_back(config.d_tex, config.lr_codes);
  const float scale = 2.0f / (3.0f * static_cast<float>(total_batch));

  double initial = 0.0;
  int streak = 0;
  GradientTape<float> tape = make_tape(out.network);
  VectorX<float> tail(d_sdf + config.d_tex);
  VectorX<float> tail_grad;

  for (int step = 1; step <= config.steps; ++step) {
    tape.zero();
    double sq_sum = 0.0;
    std::vector<VectorX<float>> code_grads(specs.size());
    for (std::size_t o = 0; o < specs.size(); ++o) {
      const Pool& pool = pools[o];
      const int n = sizes[o];
      std::uniform_int_distribution<Eigen::Index> pick(0, pool.points.cols() - 1);
      Matrix3X<float> x(3, n);
      Matrix3X<float> gt(3, n);
      for (int k = 0; k < n; ++k) {
        const Eigen::Index idx = pick(rng);
        x.col(k) = pool.points.col(idx);
        gt.col(k) = pool.color.col(idx);
      }
      tail.head(d_sdf) = shape_codes[o].shape;
      tail.tail(config.d_tex) = out.codes[o];
      ForwardCache<float> cache;
      const MatrixX<float> pred = forward_block(out.network, x, tail, &cache);
      const MatrixX<float> diff = pred - gt;
      sq_sum += static_cast<double>(diff.squaredNorm());
      backward_block<float>(out.network, cache, tail, MatrixX<float>(diff * scale), &tape, nullptr, &tail_grad);
      code_grads[o] = tail_grad.tail(config.d_tex);
    }
    const double mse = sq_sum / (3.0 * total_batch);
    if (step == 1) initial = std::max(mse, 1e-12);
    divergence_check(mse, initial, step, streak, "texture");

    net_adam.step(out.network, tape);
    for (std::size_t o = 0; o < specs.size(); ++o)
      adam_step<float>(code_adam[o], {out.codes[o].data(), static_cast<std::size_t>(config.d_tex)},
                       {code_grads[o].data(), static_cast<std::size_t>(config.d_tex)});

    TrainLogRow row;
    row.step = step;
    row.loss_rgb = mse;
    row.has_shape = false;
    row.has_rgb = true;
    out.log.rows.push_back(row);
  }
  return out;
}

Checkpoint make_checkpoint(const ShapePriors& shape, const TexturePriors* texture) {
  Checkpoint ck;
  ck.shape = shape.network;
  ck.latents.d_sdf = shape.network.d_sdf();
  ck.latents.d_tex = texture ? texture->network.d_tex() : 0;
  if (texture) {
    ck.texture = texture->network;
    if (texture->codes.size() != shape.codes.size()) throw ConfigError("make_checkpoint: code count mismatch");
  }
  for (std::size_t i = 0; i < shape.codes.size(); ++i) {
    LatentCode c = shape.codes[i];
    c.texture = texture ? texture->codes[i] : VectorX<float>();
    ck.latents.codes.push_back(std::move(c));
  }
  return ck;
}

LatentCode mean_latent(const LatentTable& table, int category) {
  LatentCode mean;
  mean.category = category;
  mean.shape = VectorX<float>::Zero(table.d_sdf);
  mean.texture = VectorX<float>::Zero(table.d_tex);
  VectorX<double> s = VectorX<double>::Zero(table.d_sdf);
  VectorX<double> t = VectorX<double>::Zero(table.d_tex);
  int count = 0;
  for (const auto& c : table.codes) {
    if (c.category != category) continue;
    s += c.shape.cast<double>();
    if (table.d_tex > 0) t += c.texture.cast<double>();
    ++count;
  }
  if (count == 0) throw ConfigError("mean_latent: category " + std::to_string(category) + " has no codes");
  mean.shape = (s / count).cast<float>();
  mean.texture = (t / count).cast<float>();
  return mean;
}

double evaluate_shape_loss(const FieldNetwork& net, const LatentCode& code, const ShapeSpec& spec, double delta,
                           std::uint64_t seed, int count) {
  SampleCounts counts{count / 3, count / 3, count - 2 * (count / 3), 0.025};
  const auto samples = sample_training_points(spec, counts, seed);
  std::vector<Vec3> pts;
  std::vector<double> gt;
  for (const auto& s : samples) {
    pts.push_back(s.point);
    gt.push_back(s.sdf_gt);
  }
  const MatrixX<float> pred = forward(net, code, pts);
  std::vector<double> p(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) p[i] = pred(0, static_cast<Eigen::Index>(i));
  return loss_sdf(p, gt, delta);
}

}  // namespace osdf
