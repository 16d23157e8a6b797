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

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lrexplain/gmm.hpp"
#include "lrexplain/types.hpp"

namespace lrexplain {

// Seeded synthetic embedding generator: each class is drawn from a known
// Gaussian mixture, class means separated by `mean_separation` along the
// first axis. RNG is mt19937_64; datasets are bit-reproducible within
// this implementation and statistically reproducible across others.
struct SynthSpec {
  int k = 1;
  int n_per_class = 1000;
  double mean_separation = 2.0;  // Delta
  double covariance_scale = 1.0; // sigma
  int mixture_components_per_class = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthData {
  Eigen::MatrixXd genuine;   // n_per_class x k
  Eigen::MatrixXd impostor;  // n_per_class x k
  GmmModel true_genuine;     // generating density, hypothesis H0
  GmmModel true_impostor;    // generating density, hypothesis H1
};

SynthData generate(const SynthSpec& spec);

// Exact log P0(z) - log P1(z) under the generating mixtures.
double analytic_log_lr(const SynthData& data, const Eigen::VectorXd& z);

// Wraps generated vectors as an embedding-bearing manifest so the whole
// CLI pipeline runs on synthetic data unchanged. provider_tag marks the
// vectors as synthetic.
Manifest to_manifest(const SynthData& data, const std::string& provider_tag,
                     PromptRegime regime, const std::string& id_prefix);

}  // namespace lrexplain
