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

#include <optional>
#include <string>
#include <vector>

#include "lrexplain/bundle.hpp"
#include "lrexplain/lr.hpp"
#include "lrexplain/manifest.hpp"
#include "lrexplain/metrics.hpp"
#include "lrexplain/providers.hpp"

namespace lrexplain {

struct TrainOptions {
  int components = 4;
  double variance_target = 0.97;
  std::uint64_t seed = 0;
  CovarianceKind covariance_kind = CovarianceKind::Full;
  double tol = 1e-6;
  int max_iter = 200;
  double reg = 1e-6;
  int parallelism = 4;
};

struct TrainResult {
  ModelBundle bundle;
  EmFitReport report_h0;
  EmFitReport report_h1;
  int removed_uncertain_count = 0;
};

// Full training pipeline: filter uncertain records, embed missing texts,
// fit joint PCA on the union, then one GMM per hypothesis in the reduced
// space. embedder may be null when every record carries an embedding.
TrainResult train_bundle(const Manifest& grounded_manifest, Embedder* embedder,
                         const TrainOptions& options);

struct EvaluateOptions {
  std::string out_dir;
  double tmr_fmr_target = 1e-4;
  // Optional manifest with embeddings for separability / projection.
  std::optional<std::string> manifest_path;
};

struct EvaluateSummary {
  std::string score_file;
  std::string series_name;
  double auc = 0.0;
  double eer_value = 0.0;
  double tmr_at_target = 0.0;
  std::optional<ConfusionMatrix3x2> confusion_matrix;
};

// One report set per score file: ROC points (csv), confusion matrix,
// summary JSON; plus separability and 2-D projection when a manifest with
// embeddings is supplied.
std::vector<EvaluateSummary> evaluate_score_files(
    const std::vector<std::string>& score_files, const EvaluateOptions& options);

}  // namespace lrexplain
