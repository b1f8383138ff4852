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

#include "osdf/field_net.hpp"

namespace osdf {
namespace {

MatrixX<float> uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  MatrixX<float> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = static_cast<float>(dist(rng));
  return m;
}

VectorX<float> uniform_vector(Eigen::Index n, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  VectorX<float> v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = static_cast<float>(dist(rng));
  return v;
}

void check_config(const NetworkConfig& config) {
  if (config.hidden_layers < 1 || config.hidden_width < 1)
    throw ConfigError("network needs at least one hidden layer of positive width");
}

}  // namespace

FieldNetwork make_sdf_network(const NetworkConfig& config, int d_sdf, std::mt19937_64& rng) {
  check_config(config);
  std::vector<DenseLayer<float>> layers;
  Eigen::Index in = 3 + d_sdf;
  for (int i = 0; i < config.hidden_layers; ++i) {
    const Eigen::Index out = config.hidden_width;
    layers.push_back({uniform_matrix(out, in, std::sqrt(6.0 / static_cast<double>(in)), rng),
                      VectorX<float>::Zero(out), Activation::kRelu});
    in = out;
  }
  layers.push_back({uniform_matrix(1, in, std::sqrt(1.0 / static_cast<double>(in)), rng), VectorX<float>::Zero(1),
                    Activation::kLinear});
  return FieldNetwork(FieldKind::kSdf, d_sdf, 0, 30.0f, std::move(layers));
}

FieldNetwork make_texture_network(const NetworkConfig& config, int d_sdf, int d_tex, std::mt19937_64& rng) {
  check_config(config);
  if (!(config.omega0 > 0.0)) throw ConfigError("texture network needs omega0 > 0");
  const double w0 = config.omega0;
  std::vector<DenseLayer<float>> layers;
  Eigen::Index in = 3 + d_sdf + d_tex;
  for (int i = 0; i < config.hidden_layers; ++i) {
    const Eigen::Index out = config.hidden_width;
    const double fan = static_cast<double>(in);
    const double bound = i == 0 ? 1.0 / fan : std::sqrt(6.0 / fan) / w0;
    layers.push_back({uniform_matrix(out, in, bound, rng), uniform_vector(out, 1.0 / std::sqrt(fan) / w0, rng),
                      Activation::kSine});
    in = out;
  }
  layers.push_back({uniform_matrix(3, in, std::sqrt(6.0 / static_cast<double>(in)) / w0, rng),
                    VectorX<float>::Constant(3, 0.5f), Activation::kLinear});
  return FieldNetwork(FieldKind::kTexture, d_sdf, d_tex, static_cast<float>(w0), std::move(layers));
}

}  // namespace osdf
