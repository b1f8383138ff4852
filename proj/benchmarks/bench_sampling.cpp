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

#include "osdf/octree.hpp"

namespace {

using namespace osdf;

const AnalyticSdf& sphere() {
  static const AnalyticSdf field(ShapeSpec::sphere(0.3));
  return field;
}

void BM_Octree(benchmark::State& state) {
  OctreeOptions options;
  options.lod_end = static_cast<int>(state.range(0));
  std::size_t inputs = 0;
  for (auto _ : state) {
    auto e = extract_octree(sphere(), nullptr, options);
    inputs = e.report.input_points;
    benchmark::DoNotOptimize(e.cloud.points.data());
  }
  state.counters["inputs"] = static_cast<double>(inputs);
}
BENCHMARK(BM_Octree)->Arg(5)->Arg(6)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_Grid(benchmark::State& state) {
  const int resolution = static_cast<int>(state.range(0));
  std::size_t inputs = 0;
  for (auto _ : state) {
    auto e = extract_grid(sphere(), nullptr, resolution);
    inputs = e.report.input_points;
    benchmark::DoNotOptimize(e.cloud.points.data());
  }
  state.counters["inputs"] = static_cast<double>(inputs);
}
BENCHMARK(BM_Grid)->Arg(40)->Arg(50)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace
