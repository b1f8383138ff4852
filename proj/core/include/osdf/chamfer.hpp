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

// Nearest neighbours and the symmetric Chamfer distance.

#include <span>
#include <vector>

#include "osdf/common.hpp"

namespace osdf {

// Static 3D kd-tree over a borrowed point set.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  // Index of the nearest point (lowest index among exact ties) and its
  // squared distance. The tree must be nonempty.
  std::size_t nearest(const Vec3& query, double* squared_distance = nullptr) const;
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    int axis = -1;  // -1 for leaves
    double split = 0.0;
    std::uint32_t begin = 0, end = 0;  // leaf range in order_
    std::uint32_t left = 0, right = 0;
  };
  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node, const Vec3& q, std::size_t& best, double& best_d) const;

  std::span<const Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

struct NearestNeighbors {
  std::vector<std::size_t> index;
  std::vector<double> squared_distance;
};

// O(|queries| |targets|) double loop.
NearestNeighbors nearest_brute(std::span<const Vec3> queries, std::span<const Vec3> targets);
// Brute force below kBruteForceLimit targets, kd-tree otherwise. Same
// result as nearest_brute.
NearestNeighbors nearest_neighbors(std::span<const Vec3> queries, std::span<const Vec3> targets);
inline constexpr std::size_t kBruteForceLimit = 5000;

// mean_a min_b |a-b|^2 + mean_b min_a |a-b|^2. ConfigError on empty input.
double chamfer(std::span<const Vec3> a, std::span<const Vec3> b);
double chamfer_brute(std::span<const Vec3> a, std::span<const Vec3> b);

struct ChamferGradient {
  double value = 0.0;
  std::vector<Vec3> grad_a;
  std::vector<Vec3> grad_b;
};

// Gradient with the nearest-neighbour assignment held fixed.
ChamferGradient chamfer_with_gradient(std::span<const Vec3> a, std::span<const Vec3> b);

}  // namespace osdf
