// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lrexplain {

// Global switch for the OpenMP kernels. Defaults to on when compiled with
// OpenMP; the serial reference path stays available for testing and
// benchmarking either way.
bool parallel_enabled();
void set_parallel_enabled(bool enabled);

// Deterministic sum: per-point terms are computed in parallel, block
// partial sums are accumulated in fixed block order, so the result is
// identical for any thread count (including 1).
inline constexpr std::int64_t kSumBlock = 1024;

template <typename TermFn>
double deterministic_sum(std::int64_t n, TermFn&& term) {
  const std::int64_t n_blocks = (n + kSumBlock - 1) / kSumBlock;
  std::vector<double> block_sums(static_cast<std::size_t>(n_blocks), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel_enabled())
#endif
  for (std::int64_t b = 0; b < n_blocks; ++b) {
    const std::int64_t lo = b * kSumBlock;
    const std::int64_t hi = std::min(n, lo + kSumBlock);
    double s = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) s += term(i);
    block_sums[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double s : block_sums) total += s;
  return total;
}

// Parallel loop over independent items; no reduction, so ordering is
// irrelevant for determinism.
template <typename BodyFn>
void parallel_for(std::int64_t n, BodyFn&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel_enabled())
#endif
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace lrexplain
