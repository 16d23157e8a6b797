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
#include <array>
#include <string>
#include <utility>
#include <vector>

#include "lrexplain/types.hpp"

namespace lrexplain {

struct RocPoint {
  double fmr = 0.0;
  double tmr = 0.0;
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // fmr non-decreasing, anchored at (0,0), (1,1)
  double auc = 0.0;
};

// Tie convention: score >= threshold predicts match. auc equals the
// Mann-Whitney statistic P(g > i) + 0.5 P(g = i).
RocCurve roc_from_scores(const std::vector<double>& genuine_scores,
                         const std::vector<double>& impostor_scores);

// Largest tmr among curve points with fmr <= fmr_target; 0 if only the
// (0,0) anchor qualifies.
double tmr_at_fmr(const RocCurve& curve, double fmr_target);

// Equal error rate by linear interpolation between the bracketing points.
double eer(const RocCurve& curve);

struct ConfusionMatrix3x2 {
  // rows: 0 = Genuine, 1 = Impostor; cols: 0 = Match, 1 = NonMatch,
  // 2 = Uncertain.
  std::array<std::array<long long, 3>, 2> raw_counts{};
  std::array<std::array<double, 3>, 2> proportions{};
  std::array<bool, 2> empty_row{};

  // Row percentage rendered with one decimal, e.g. "98.6%".
  std::string cell_percent(int row, int col) const;
};

ConfusionMatrix3x2 confusion(
    const std::vector<std::pair<PairLabel, Verdict>>& records);

ConfusionMatrix3x2 confusion_from_counts(
    const std::array<std::array<long long, 3>, 2>& counts);

enum class EmbeddingSpace { OriginalEmbedding, PcaReduced };

struct SeparabilityReport {
  double silhouette = 0.0;
  double davies_bouldin = 0.0;
  double calinski_harabasz = 0.0;
  double inter_intra_ratio = 0.0;
  double fisher_ratio = 0.0;
  bool degenerate_within_scatter = false;  // fisher / CH reported as +inf
  EmbeddingSpace space = EmbeddingSpace::OriginalEmbedding;
};

// Two-cluster separability indices, all Euclidean. rows of each matrix
// are samples.
SeparabilityReport separability(const Eigen::MatrixXd& genuine_vectors,
                                const Eigen::MatrixXd& impostor_vectors,
                                EmbeddingSpace space);

struct ProjectedPoint {
  double x = 0.0;
  double y = 0.0;
  PairLabel label = PairLabel::Unknown;
};

// Deterministic 2-D projection onto the top-2 principal directions.
std::vector<ProjectedPoint> project_2d(const Eigen::MatrixXd& vectors,
                                       const std::vector<PairLabel>& labels);

namespace reference {
// Brute-force pair enumeration oracle for the ROC auc.
double auc_by_pair_counting(const std::vector<double>& genuine_scores,
                            const std::vector<double>& impostor_scores);
// Single-threaded separability computation, oracle for the parallel
// distance kernels.
SeparabilityReport separability_serial(const Eigen::MatrixXd& genuine_vectors,
                                       const Eigen::MatrixXd& impostor_vectors,
                                       EmbeddingSpace space);
}  // namespace reference

}  // namespace lrexplain
