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

#include <benchmark/benchmark.h>

#include <random>

#include "osdf/chamfer.hpp"
#include "osdf/field_net.hpp"
#include "osdf/octree.hpp"

namespace {

using namespace osdf;

std::vector<Vec3> cube_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  return pts;
}

void BM_SdfForward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const FieldNetwork net = make_sdf_network({4, 128, 30.0}, 64, rng);
  const LatentCode code{VectorX<float>::Zero(64), {}, 0};
  const auto pts = cube_points(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(forward(net, code, pts).data());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SdfForward)->Arg(1024)->Arg(16384);

void BM_SdfValueAndGradient(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const FieldNetwork net = make_sdf_network({4, 128, 30.0}, 64, rng);
  const NetworkSdf field(net, VectorX<float>::Zero(64));
  const auto pts = cube_points(static_cast<std::size_t>(state.range(0)), 3);
  std::vector<double> values(pts.size());
  std::vector<Vec3> grads(pts.size());
  for (auto _ : state) {
    field.evaluate_with_gradient(pts, values, grads);
    benchmark::DoNotOptimize(grads.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SdfValueAndGradient)->Arg(16384);

void BM_Chamfer(benchmark::State& state) {
  const auto a = cube_points(static_cast<std::size_t>(state.range(0)), 4);
  const auto b = cube_points(static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer(a, b));
}
BENCHMARK(BM_Chamfer)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
