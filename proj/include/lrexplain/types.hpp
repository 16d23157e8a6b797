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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lrexplain/errors.hpp"

namespace lrexplain {

// Ground-truth hypothesis membership for a face pair. Genuine = H0,
// Impostor = H1. Unknown is legal only in test-time manifests.
enum class PairLabel { Genuine, Impostor, Unknown };

// Verdict extracted from a model response. Anything that is not
// recognizably match / non-match collapses to Uncertain.
enum class Verdict { Match, NonMatch, Uncertain };

// Levels of auxiliary information in the prompt. Grounded (which reveals
// the ground-truth label) is legal only for training-set generation.
enum class PromptRegime { Grounded, NoScore, ScoreOnly, ScorePlusDecision };

std::string to_string(PairLabel v);
std::string to_string(Verdict v);
std::string to_string(PromptRegime v);

PairLabel pair_label_from_string(const std::string& s);
Verdict verdict_from_string(const std::string& s);
PromptRegime regime_from_string(const std::string& s);

// Fixed-dimension real vector from an embedding provider.
struct EmbeddingVector {
  std::vector<double> values;
  std::string provider_tag;

  int dim() const { return static_cast<int>(values.size()); }
};

// One face pair with everything the pipeline attaches to it. Images are
// carried as opaque identifiers; the toolkit never opens image files.
struct PairRecord {
  std::string pair_id;
  std::string image_a;
  std::string image_b;
  PairLabel label = PairLabel::Unknown;
  std::map<std::string, double> fr_scores;      // model name -> s_FR in [-1, 1]
  std::map<std::string, Verdict> fr_decisions;  // Match / NonMatch only
  PromptRegime regime = PromptRegime::NoScore;
  std::optional<std::string> explanation;
  std::optional<Verdict> verdict;
  std::optional<EmbeddingVector> embedding;

  // Throws DataError on an invariant violation.
  void validate() const;
};

struct Manifest {
  std::vector<PairRecord> records;
  std::map<std::string, std::string> metadata;
};

}  // namespace lrexplain
