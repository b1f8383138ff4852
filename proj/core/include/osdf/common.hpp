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

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace osdf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

template <typename T>
using MatrixX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using VectorX = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using Matrix3X = Eigen::Matrix<T, 3, Eigen::Dynamic>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid dimensions, arguments, or configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed checkpoint, PLY, or raster file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A surface extraction level retained no cells.
class EmptySurfaceError : public Error {
 public:
  using Error::Error;
};

class EmptyObservationError : public Error {
 public:
  using Error::Error;
};

class DegenerateRotationError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

// Worker count: OSDF_THREADS if set, otherwise hardware concurrency. A value
// set through set_thread_cap() takes precedence over both.
int thread_count();
void set_thread_cap(int threads);
int thread_cap();

// Caps parallelism for the lifetime of the object.
class ScopedThreadCap {
 public:
  explicit ScopedThreadCap(int threads) : previous_(thread_cap()) { set_thread_cap(threads); }
  ~ScopedThreadCap() { set_thread_cap(previous_); }
  ScopedThreadCap(const ScopedThreadCap&) = delete;
  ScopedThreadCap& operator=(const ScopedThreadCap&) = delete;

 private:
  int previous_;
};

// Runs fn(begin, end) over disjoint contiguous ranges covering [0, n).
// Ranges are fixed by n and the thread count, so results written per index
// are independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                  std::size_t min_chunk = 1024);

inline std::vector<Vec3> to_points(const Eigen::Ref<const Eigen::Matrix3Xd>& m) {
  std::vector<Vec3> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.cols(); ++i) out[static_cast<std::size_t>(i)] = m.col(i);
  return out;
}

}  // namespace osdf
