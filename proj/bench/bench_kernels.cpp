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

// Compares the OpenMP kernels against their serial reference
// implementations: GMM E-step and the pairwise separability indices.

#include <chrono>
#include <cstdio>
#include <random>

#include "lrexplain/gmm.hpp"
#include "lrexplain/metrics.hpp"
#include "lrexplain/parallel.hpp"

using namespace lrexplain;
using clock_type = std::chrono::steady_clock;

namespace {

double ms_since(clock_type::time_point start) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - start)
      .count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clock_type::now();
    f();
    best = std::min(best, ms_since(t0));
  }
  return best;
}

void bench_estep(int n, int k, int J) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd points(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) points(i, j) = gauss(rng) + (i % J);

  GmmFitOptions opts;
  opts.components = J;
  opts.seed = 2;
  opts.max_iter = 5;  // just enough to get a realistic model
  const auto [model, report] = fit_gmm(points, opts);

  Eigen::MatrixXd resp_par, resp_ser;
  double ll_par = 0.0, ll_ser = 0.0;
  const double t_par = time_best_of(
      5, [&] { ll_par = detail::estep(model, points, resp_par); });
  const double t_ser = time_best_of(
      5, [&] { ll_ser = reference::estep_serial(model, points, resp_ser); });
  const double max_diff = (resp_par - resp_ser).cwiseAbs().maxCoeff();

  std::printf(
      "estep    n=%-7d k=%-3d J=%-2d  parallel %8.2f ms  serial %8.2f ms  "
      "speedup %5.2fx  max|diff| %.2e  |dll| %.2e\n",
      n, k, J, t_par, t_ser, t_ser / t_par, max_diff,
      std::abs(ll_par - ll_ser));
}

void bench_separability(int n, int k) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(n, k), m(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) {
      g(i, j) = gauss(rng) + (j == 0 ? 1.5 : 0.0);
      m(i, j) = gauss(rng) - (j == 0 ? 1.5 : 0.0);
    }

  SeparabilityReport par, ser;
  const double t_par = time_best_of(3, [&] {
    par = separability(g, m, EmbeddingSpace::OriginalEmbedding);
  });
  const double t_ser = time_best_of(3, [&] {
    ser = reference::separability_serial(g, m,
                                         EmbeddingSpace::OriginalEmbedding);
  });
  std::printf(
      "separab. n=%-7d k=%-3d       parallel %8.2f ms  serial %8.2f ms  "
      "speedup %5.2fx  |dsil| %.2e\n",
      2 * n, k, t_par, t_ser, t_ser / t_par,
      std::abs(par.silhouette - ser.silhouette));
}

}  // namespace

int main() {
  std::printf("parallel kernels %s\n\n",
              parallel_enabled() ? "enabled" : "disabled");

  bench_estep(20000, 16, 4);
  bench_estep(100000, 16, 4);
  bench_estep(100000, 64, 4);
  std::printf("\n");
  bench_separability(1000, 32);
  bench_separability(4000, 32);
  bench_separability(4000, 128);
  return 0;
}
