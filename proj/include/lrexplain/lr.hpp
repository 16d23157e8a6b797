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
#include <optional>
#include <string>
#include <vector>

#include "lrexplain/gmm.hpp"
#include "lrexplain/pca.hpp"
#include "lrexplain/types.hpp"

namespace lrexplain {

class Embedder;  // providers.hpp

// log Lambda = log P0(z) - log P1(z); s_expl is the logistic of log
// Lambda, computed without ever materializing Lambda.
struct LrResult {
  double log_p0 = 0.0;
  double log_p1 = 0.0;
  double log_lr = 0.0;
  double s_expl = 0.5;
};

// Clamp applied to log_lr before the sigmoid only, at the double exp
// overflow margin.
constexpr double kLogLrClamp = 700.0;

double sigmoid_of_log_lr(double log_lr);

LrResult score_pair(const GmmModel& genuine_model,
                    const GmmModel& impostor_model, const Eigen::VectorXd& z);

struct ScoredPair {
  std::string pair_id;
  PairLabel label = PairLabel::Unknown;
  PromptRegime regime = PromptRegime::NoScore;
  LrResult lr;
  std::optional<Verdict> verdict;
};

struct ScoreManifestResult {
  std::vector<ScoredPair> scored;  // input order, skipped records excluded
  std::vector<std::string> skipped_pair_ids;
};

// Scores every record that has an embedding or explanation text; records
// with neither are reported as skipped. Precomputed embeddings must carry
// the expected provider tag.
ScoreManifestResult score_manifest(const GmmModel& genuine_model,
                                   const GmmModel& impostor_model,
                                   const PcaModel& pca,
                                   const Manifest& manifest,
                                   Embedder& embedder,
                                   const std::string& provider_tag);

// Score files are JSON lines mirroring the manifest format.
void write_score_file(const std::vector<ScoredPair>& scored,
                      const std::string& path);
std::vector<ScoredPair> read_score_file(const std::string& path);

}  // namespace lrexplain
