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

#include "osdf/chamfer.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace osdf {
namespace {

constexpr std::uint32_t kLeafSize = 8;

void require_nonempty(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw ConfigError("chamfer: point sets must be nonempty");
}

// Ties go to the lower index so brute force and the tree agree exactly.
inline void consider(std::size_t i, double d, std::size_t& best, double& best_d) {
  if (d < best_d || (d == best_d && i < best)) {
    best_d = d;
    best = i;
  }
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points) {
  if (points.size() >= std::numeric_limits<std::uint32_t>::max()) throw ConfigError("kd-tree: too many points");
  order_.resize(points.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points.empty()) {
    nodes_.reserve(2 * points.size() / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(points.size()));
  }
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  Node& n = nodes_[id];
  n.axis = axis;
  n.split = split;
  n.left = left;
  n.right = right;
  return id;
}

void KdTree::search(std::uint32_t id, const Vec3& q, std::size_t& best, double& best_d) const {
  const Node& n = nodes_[id];
  if (n.axis < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) consider(order_[i], (points_[order_[i]] - q).squaredNorm(), best, best_d);
    return;
  }
  const double diff = q[n.axis] - n.split;
  const std::uint32_t near = diff < 0 ? n.left : n.right;
  const std::uint32_t far = diff < 0 ? n.right : n.left;
  search(near, q, best, best_d);
  // <= keeps exact ties on the far side reachable.
  if (diff * diff <= best_d) search(far, q, best, best_d);
}

std::size_t KdTree::nearest(const Vec3& query, double* squared_distance) const {
  if (points_.empty()) throw ConfigError("kd-tree: empty");
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_d = std::numeric_limits<double>::infinity();
  search(0, query, best, best_d);
  if (squared_distance) *squared_distance = best_d;
  return best;
}

NearestNeighbors nearest_brute(std::span<const Vec3> queries, std::span<const Vec3> targets) {
  if (targets.empty()) throw ConfigError("nearest neighbours: empty target set");
  NearestNeighbors nn;
  nn.index.resize(queries.size());
  nn.squared_distance.resize(queries.size());
  parallel_for(queries.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::size_t best = std::numeric_limits<std::size_t>::max();
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < targets.size(); ++j) consider(j, (targets[j] - queries[i]).squaredNorm(), best, best_d);
      nn.index[i] = best;
      nn.squared_distance[i] = best_d;
    }
  }, 64);
  return nn;
}

NearestNeighbors nearest_neighbors(std::span<const Vec3> queries, std::span<const Vec3> targets) {
  if (targets.size() < kBruteForceLimit) return nearest_brute(queries, targets);
  const KdTree tree(targets);
  NearestNeighbors nn;
  nn.index.resize(queries.size());
  nn.squared_distance.resize(queries.size());
  parallel_for(queries.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) nn.index[i] = tree.nearest(queries[i], &nn.squared_distance[i]);
  }, 256);
  return nn;
}

double chamfer(std::span<const Vec3> a, std::span<const Vec3> b) {
  require_nonempty(a, b);
  const auto ab = nearest_neighbors(a, b);
  const auto ba = nearest_neighbors(b, a);
  const double sa = std::accumulate(ab.squared_distance.begin(), ab.squared_distance.end(), 0.0);
  const double sb = std::accumulate(ba.squared_distance.begin(), ba.squared_distance.end(), 0.0);
  return sa / static_cast<double>(a.size()) + sb / static_cast<double>(b.size());
}

double chamfer_brute(std::span<const Vec3> a, std::span<const Vec3> b) {
  require_nonempty(a, b);
  auto directed = [](std::span<const Vec3> x, std::span<const Vec3> y) {
    double sum = 0.0;
    for (const Vec3& p : x) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : y) best = std::min(best, (p - q).squaredNorm());
      sum += best;
    }
    return sum / static_cast<double>(x.size());
  };
  return directed(a, b) + directed(b, a);
}

ChamferGradient chamfer_with_gradient(std::span<const Vec3> a, std::span<const Vec3> b) {
  require_nonempty(a, b);
  const auto ab = nearest_neighbors(a, b);
  const auto ba = nearest_neighbors(b, a);
  const double wa = 2.0 / static_cast<double>(a.size());
  const double wb = 2.0 / static_cast<double>(b.size());
  ChamferGradient out;
  out.grad_a.assign(a.size(), Vec3::Zero());
  out.grad_b.assign(b.size(), Vec3::Zero());
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Vec3 d = a[i] - b[ab.index[i]];
    sa += ab.squared_distance[i];
    out.grad_a[i] += wa * d;
    out.grad_b[ab.index[i]] -= wa * d;
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    const Vec3 d = b[j] - a[ba.index[j]];
    sb += ba.squared_distance[j];
    out.grad_b[j] += wb * d;
    out.grad_a[ba.index[j]] -= wb * d;
  }
  out.value = sa / static_cast<double>(a.size()) + sb / static_cast<double>(b.size());
  return out;
}

}  // namespace osdf
