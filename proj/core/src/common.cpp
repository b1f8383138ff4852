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

#include "osdf/common.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace osdf {
namespace {

std::atomic<int> g_thread_cap{0};

}  // namespace

int thread_count() {
  if (int cap = g_thread_cap.load(); cap > 0) return cap;
  if (const char* env = std::getenv("OSDF_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_thread_cap(int threads) { g_thread_cap.store(std::max(0, threads)); }

int thread_cap() { return g_thread_cap.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                  std::size_t min_chunk) {
  if (n == 0) return;
  std::size_t workers = static_cast<std::size_t>(thread_count());
  workers = std::min(workers, (n + min_chunk - 1) / std::max<std::size_t>(1, min_chunk));
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t begin = w * chunk;
    std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace osdf
