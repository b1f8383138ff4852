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

// Latent-conditioned dense field networks with hand-written reverse mode.
//
// A network maps [x; z] to either a signed distance (SDF variant, input
// 3 + d_sdf, output 1) or an RGB triple (texture variant, input
// 3 + d_sdf + d_tex, output 3). All points in one call share the same latent
// vector, so the first layer is split into a point block W_x and a latent
// block W_z: the latent contribution W_z z + b is computed once per call.
//
// Activations are stored column-per-point (rows = units).

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "osdf/common.hpp"

namespace osdf {

enum class Activation : std::uint32_t { kLinear = 0, kRelu = 1, kSine = 2 };
enum class FieldKind : std::uint32_t { kSdf = 0, kTexture = 1 };

struct NetworkConfig {
  int hidden_layers = 4;
  int hidden_width = 128;
  // Sine frequency; only used by the texture variant.
  double omega0 = 30.0;
};

template <typename T>
struct DenseLayer {
  MatrixX<T> weight;  // out x in
  VectorX<T> bias;
  Activation activation = Activation::kLinear;
};

template <typename T>
struct BasicLatentCode {
  VectorX<T> shape;
  VectorX<T> texture;
  int category = 0;

  template <typename U>
  BasicLatentCode<U> cast() const {
    return {shape.template cast<U>(), texture.template cast<U>(), category};
  }
};

using LatentCode = BasicLatentCode<float>;

template <typename T>
class BasicFieldNetwork {
 public:
  using Scalar = T;

  BasicFieldNetwork() = default;
  BasicFieldNetwork(FieldKind kind, int d_sdf, int d_tex, T omega0, std::vector<DenseLayer<T>> layers)
      : kind_(kind), d_sdf_(d_sdf), d_tex_(d_tex), omega0_(omega0), layers_(std::move(layers)) {
    validate();
  }

  FieldKind kind() const { return kind_; }
  int d_sdf() const { return d_sdf_; }
  int d_tex() const { return d_tex_; }
  T omega0() const { return omega0_; }
  int latent_dim() const { return kind_ == FieldKind::kSdf ? d_sdf_ : d_sdf_ + d_tex_; }
  int input_dim() const { return 3 + latent_dim(); }
  int output_dim() const { return kind_ == FieldKind::kSdf ? 1 : 3; }
  bool empty() const { return layers_.empty(); }

  const std::vector<DenseLayer<T>>& layers() const { return layers_; }
  std::vector<DenseLayer<T>>& mutable_layers() { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  // Widest activation, used as a per-point memory figure.
  int max_width() const {
    int w = input_dim();
    for (const auto& l : layers_) w = std::max(w, static_cast<int>(l.weight.rows()));
    return w;
  }

  void validate() const {
    if (layers_.empty()) throw ConfigError("field network has no layers");
    if (d_sdf_ <= 0 || (kind_ == FieldKind::kTexture && d_tex_ <= 0))
      throw ConfigError("field network latent dimensions must be positive");
    Eigen::Index in = input_dim();
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& l = layers_[i];
      if (l.weight.cols() != in || l.bias.size() != l.weight.rows())
        throw ConfigError("layer " + std::to_string(i) + " shape does not chain");
      if (l.activation == Activation::kSine && !(omega0_ > T(0)))
        throw ConfigError("sine layers need omega0 > 0");
      in = l.weight.rows();
    }
    if (in != output_dim()) throw ConfigError("final layer width does not match output dimension");
  }

  template <typename U>
  BasicFieldNetwork<U> cast() const {
    std::vector<DenseLayer<U>> out;
    out.reserve(layers_.size());
    for (const auto& l : layers_)
      out.push_back({l.weight.template cast<U>(), l.bias.template cast<U>(), l.activation});
    return BasicFieldNetwork<U>(kind_, d_sdf_, d_tex_, static_cast<U>(omega0_), std::move(out));
  }

 private:
  FieldKind kind_ = FieldKind::kSdf;
  int d_sdf_ = 0;
  int d_tex_ = 0;
  T omega0_ = T(30);
  std::vector<DenseLayer<T>> layers_;
};

using FieldNetwork = BasicFieldNetwork<float>;
using FieldNetworkD = BasicFieldNetwork<double>;

// Relu layers: Kaiming-uniform weights, zero bias. Final layer is linear.
FieldNetwork make_sdf_network(const NetworkConfig& config, int d_sdf, std::mt19937_64& rng);
// Siren layout: first sine layer U(-1/in, 1/in), hidden sine layers
// U(-sqrt(6/in)/omega0, +), linear RGB head biased to mid-gray.
FieldNetwork make_texture_network(const NetworkConfig& config, int d_sdf, int d_tex, std::mt19937_64& rng);

// Intermediate values kept for a backward pass.
template <typename T>
struct ForwardCache {
  Matrix3X<T> points;
  std::vector<MatrixX<T>> pre;  // pre-activations per layer
  std::vector<MatrixX<T>> act;  // activations per layer
};

template <typename T>
struct GradientTape {
  std::vector<MatrixX<T>> weight;
  std::vector<VectorX<T>> bias;
  VectorX<T> shape_latent;
  VectorX<T> texture_latent;
  Matrix3X<T> points;

  void zero() {
    for (auto& w : weight) w.setZero();
    for (auto& b : bias) b.setZero();
    shape_latent.setZero();
    texture_latent.setZero();
    points.setZero();
  }

  T parameter_squared_norm() const {
    T s = 0;
    for (const auto& w : weight) s += w.squaredNorm();
    for (const auto& b : bias) s += b.squaredNorm();
    return s;
  }
};

template <typename T>
GradientTape<T> make_tape(const BasicFieldNetwork<T>& net, Eigen::Index point_count = 0) {
  GradientTape<T> tape;
  for (const auto& l : net.layers()) {
    tape.weight.push_back(MatrixX<T>::Zero(l.weight.rows(), l.weight.cols()));
    tape.bias.push_back(VectorX<T>::Zero(l.bias.size()));
  }
  tape.shape_latent = VectorX<T>::Zero(net.d_sdf());
  tape.texture_latent = VectorX<T>::Zero(net.kind() == FieldKind::kTexture ? net.d_tex() : 0);
  tape.points = Matrix3X<T>::Zero(3, point_count);
  return tape;
}

namespace detail {

template <typename T>
void check_latents(const BasicFieldNetwork<T>& net, const BasicLatentCode<T>& latents) {
  net.validate();
  if (latents.shape.size() != net.d_sdf())
    throw ConfigError("shape latent has dimension " + std::to_string(latents.shape.size()) +
                      ", network expects " + std::to_string(net.d_sdf()));
  if (net.kind() == FieldKind::kTexture && latents.texture.size() != net.d_tex())
    throw ConfigError("texture latent has dimension " + std::to_string(latents.texture.size()) +
                      ", network expects " + std::to_string(net.d_tex()));
}

template <typename T>
VectorX<T> latent_tail(const BasicFieldNetwork<T>& net, const BasicLatentCode<T>& latents) {
  VectorX<T> tail(net.latent_dim());
  tail.head(net.d_sdf()) = latents.shape;
  if (net.kind() == FieldKind::kTexture) tail.tail(net.d_tex()) = latents.texture;
  return tail;
}

template <typename T>
Matrix3X<T> pack_points(std::span<const Vec3> points) {
  Matrix3X<T> m(3, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = points[i].cast<T>();
  return m;
}

template <typename T>
void apply_activation(Activation a, T omega0, const MatrixX<T>& pre, MatrixX<T>& out) {
  switch (a) {
    case Activation::kLinear:
      out = pre;
      break;
    case Activation::kRelu:
      out = pre.cwiseMax(T(0));
      break;
    case Activation::kSine:
      out = (pre * omega0).array().sin().matrix();
      break;
  }
}

// d act / d pre, multiplied elementwise into grad.
template <typename T>
void activation_backward(Activation a, T omega0, const MatrixX<T>& pre, MatrixX<T>& grad) {
  switch (a) {
    case Activation::kLinear:
      break;
    case Activation::kRelu:
      grad = (pre.array() > T(0)).select(grad, T(0));
      break;
    case Activation::kSine:
      grad.array() *= (pre * omega0).array().cos() * omega0;
      break;
  }
}

}  // namespace detail

// Core batched forward over a 3 x N point block with a shared latent tail.
template <typename T>
MatrixX<T> forward_block(const BasicFieldNetwork<T>& net, const Matrix3X<T>& points, const VectorX<T>& tail,
                         ForwardCache<T>* cache) {
  const auto& layers = net.layers();
  const auto& first = layers.front();
  VectorX<T> shift = first.bias;
  if (tail.size() > 0) shift.noalias() += first.weight.rightCols(tail.size()) * tail;
  MatrixX<T> pre = first.weight.leftCols(3) * points;
  pre.colwise() += shift;
  MatrixX<T> act;
  detail::apply_activation(first.activation, net.omega0(), pre, act);
  if (cache) {
    cache->points = points;
    cache->pre.assign(1, pre);
    cache->act.assign(1, act);
  }
  for (std::size_t i = 1; i < layers.size(); ++i) {
    const auto& l = layers[i];
    pre.noalias() = l.weight * act;
    pre.colwise() += l.bias;
    detail::apply_activation(l.activation, net.omega0(), pre, act);
    if (cache) {
      cache->pre.push_back(pre);
      cache->act.push_back(act);
    }
  }
  return act;
}

// Reverse pass for forward_block. Parameter and latent gradients are
// accumulated into tape (if given); point gradients are written to
// point_grads (if given).
template <typename T>
void backward_block(const BasicFieldNetwork<T>& net, const ForwardCache<T>& cache, const VectorX<T>& tail,
                    const MatrixX<T>& output_cotangent, GradientTape<T>* tape, Matrix3X<T>* point_grads,
                    VectorX<T>* tail_grad) {
  const auto& layers = net.layers();
  MatrixX<T> grad = output_cotangent;
  for (std::size_t k = layers.size(); k-- > 0;) {
    const auto& l = layers[k];
    detail::activation_backward(l.activation, net.omega0(), cache.pre[k], grad);
    if (k > 0) {
      if (tape) {
        tape->weight[k].noalias() += grad * cache.act[k - 1].transpose();
        tape->bias[k] += grad.rowwise().sum();
      }
      MatrixX<T> next = l.weight.transpose() * grad;
      grad.swap(next);
      continue;
    }
    VectorX<T> row_sum = grad.rowwise().sum();
    if (tape) {
      tape->weight[0].leftCols(3).noalias() += grad * cache.points.transpose();
      if (tail.size() > 0) tape->weight[0].rightCols(tail.size()).noalias() += row_sum * tail.transpose();
      tape->bias[0] += row_sum;
    }
    if (point_grads) point_grads->noalias() = l.weight.leftCols(3).transpose() * grad;
    if (tail_grad && tail.size() > 0) tail_grad->noalias() = l.weight.rightCols(tail.size()).transpose() * row_sum;
  }
}

// One output column per point (1 row for SDF, 3 rows for texture).
template <typename T>
MatrixX<T> forward(const BasicFieldNetwork<T>& net, const BasicLatentCode<T>& latents, std::span<const Vec3> points) {
  detail::check_latents(net, latents);
  VectorX<T> tail = detail::latent_tail(net, latents);
  MatrixX<T> out(net.output_dim(), static_cast<Eigen::Index>(points.size()));
  constexpr std::size_t kChunk = 8192;
  for (std::size_t begin = 0; begin < points.size(); begin += kChunk) {
    std::size_t n = std::min(kChunk, points.size() - begin);
    Matrix3X<T> block = detail::pack_points<T>(points.subspan(begin, n));
    out.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(n)) =
        forward_block<T>(net, block, tail, nullptr);
  }
  return out;
}

// Gradient of scalar loss sum_ij cot(i,j) * out(i,j) with respect to the
// parameters, the latent codes, and every input point.
template <typename T>
GradientTape<T> backward(const BasicFieldNetwork<T>& net, const BasicLatentCode<T>& latents,
                         std::span<const Vec3> points, const MatrixX<T>& output_cotangents) {
  detail::check_latents(net, latents);
  if (output_cotangents.rows() != net.output_dim() ||
      output_cotangents.cols() != static_cast<Eigen::Index>(points.size()))
    throw ConfigError("cotangent shape does not match outputs");
  VectorX<T> tail = detail::latent_tail(net, latents);
  GradientTape<T> tape = make_tape(net, static_cast<Eigen::Index>(points.size()));
  VectorX<T> tail_grad = VectorX<T>::Zero(tail.size());
  constexpr std::size_t kChunk = 8192;
  for (std::size_t begin = 0; begin < points.size(); begin += kChunk) {
    std::size_t n = std::min(kChunk, points.size() - begin);
    auto b = static_cast<Eigen::Index>(begin);
    auto m = static_cast<Eigen::Index>(n);
    ForwardCache<T> cache;
    forward_block(net, detail::pack_points<T>(points.subspan(begin, n)), tail, &cache);
    Matrix3X<T> pg(3, m);
    VectorX<T> tg;
    backward_block(net, cache, tail, MatrixX<T>(output_cotangents.middleCols(b, m)), &tape, &pg, &tg);
    tape.points.middleCols(b, m) = pg;
    if (tail.size() > 0) tail_grad += tg;
  }
  tape.shape_latent = tail_grad.head(net.d_sdf());
  if (net.kind() == FieldKind::kTexture) tape.texture_latent = tail_grad.tail(net.d_tex());
  return tape;
}

// dG/dx for a scalar-output network, one backward pass per chunk.
template <typename T>
std::vector<Vec3> input_gradient(const BasicFieldNetwork<T>& net, const BasicLatentCode<T>& latents,
                                 std::span<const Vec3> points) {
  detail::check_latents(net, latents);
  if (net.output_dim() != 1) throw ConfigError("input_gradient needs a scalar-output network");
  VectorX<T> tail = detail::latent_tail(net, latents);
  std::vector<Vec3> grads(points.size());
  constexpr std::size_t kChunk = 8192;
  for (std::size_t begin = 0; begin < points.size(); begin += kChunk) {
    std::size_t n = std::min(kChunk, points.size() - begin);
    ForwardCache<T> cache;
    forward_block(net, detail::pack_points<T>(points.subspan(begin, n)), tail, &cache);
    Matrix3X<T> pg(3, static_cast<Eigen::Index>(n));
    backward_block<T>(net, cache, tail, MatrixX<T>::Ones(1, static_cast<Eigen::Index>(n)), nullptr, &pg, nullptr);
    for (std::size_t i = 0; i < n; ++i) grads[begin + i] = pg.col(static_cast<Eigen::Index>(i)).template cast<double>();
  }
  return grads;
}

// Values and dG/dx together (shares the forward pass).
template <typename T>
void evaluate_with_gradient(const BasicFieldNetwork<T>& net, const VectorX<T>& tail, std::span<const Vec3> points,
                            std::span<double> values, std::span<Vec3> grads) {
  constexpr std::size_t kChunk = 8192;
  for (std::size_t begin = 0; begin < points.size(); begin += kChunk) {
    std::size_t n = std::min(kChunk, points.size() - begin);
    ForwardCache<T> cache;
    MatrixX<T> out = forward_block(net, detail::pack_points<T>(points.subspan(begin, n)), tail, &cache);
    Matrix3X<T> pg(3, static_cast<Eigen::Index>(n));
    backward_block<T>(net, cache, tail, MatrixX<T>::Ones(1, static_cast<Eigen::Index>(n)), nullptr, &pg, nullptr);
    for (std::size_t i = 0; i < n; ++i) {
      values[begin + i] = static_cast<double>(out(0, static_cast<Eigen::Index>(i)));
      grads[begin + i] = pg.col(static_cast<Eigen::Index>(i)).template cast<double>();
    }
  }
}

// Adam with bias correction.
template <typename T>
struct AdamState {
  VectorX<T> m;
  VectorX<T> v;
  std::int64_t step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(Eigen::Index size, double learning_rate)
      : m(VectorX<T>::Zero(size)), v(VectorX<T>::Zero(size)), lr(learning_rate) {}
};

template <typename T>
void adam_step(AdamState<T>& state, std::span<T> target, std::span<const T> gradient) {
  if (target.size() != gradient.size() || static_cast<Eigen::Index>(target.size()) != state.m.size())
    throw ConfigError("adam_step: shape mismatch");
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(state.beta1);
  const T b2 = static_cast<T>(state.beta2);
  const T step_size = static_cast<T>(state.lr / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T eps = static_cast<T>(state.eps);
  for (std::size_t i = 0; i < target.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const T g = gradient[i];
    state.m[k] = b1 * state.m[k] + (T(1) - b1) * g;
    state.v[k] = b2 * state.v[k] + (T(1) - b2) * g * g;
    target[i] -= step_size * state.m[k] / (std::sqrt(state.v[k] * inv_c2) + eps);
  }
}

// One Adam state per weight and bias tensor.
template <typename T>
class NetworkAdam {
 public:
  NetworkAdam() = default;
  NetworkAdam(const BasicFieldNetwork<T>& net, double lr) {
    for (const auto& l : net.layers()) {
      weight_.emplace_back(l.weight.size(), lr);
      bias_.emplace_back(l.bias.size(), lr);
    }
  }

  void step(BasicFieldNetwork<T>& net, const GradientTape<T>& tape) {
    auto& layers = net.mutable_layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
      adam_step<T>(weight_[i], {layers[i].weight.data(), static_cast<std::size_t>(layers[i].weight.size())},
                   {tape.weight[i].data(), static_cast<std::size_t>(tape.weight[i].size())});
      adam_step<T>(bias_[i], {layers[i].bias.data(), static_cast<std::size_t>(layers[i].bias.size())},
                   {tape.bias[i].data(), static_cast<std::size_t>(tape.bias[i].size())});
    }
  }

 private:
  std::vector<AdamState<T>> weight_;
  std::vector<AdamState<T>> bias_;
};

}  // namespace osdf
