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

#include "lrexplain/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace lrexplain {

namespace {
std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}
}  // namespace

std::string to_string(PairLabel v) {
  switch (v) {
    case PairLabel::Genuine: return "genuine";
    case PairLabel::Impostor: return "impostor";
    case PairLabel::Unknown: return "unknown";
  }
  return "unknown";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Match: return "match";
    case Verdict::NonMatch: return "non-match";
    case Verdict::Uncertain: return "uncertain";
  }
  return "uncertain";
}

std::string to_string(PromptRegime v) {
  switch (v) {
    case PromptRegime::Grounded: return "grounded";
    case PromptRegime::NoScore: return "no-score";
    case PromptRegime::ScoreOnly: return "score-only";
    case PromptRegime::ScorePlusDecision: return "score+decision";
  }
  return "no-score";
}

PairLabel pair_label_from_string(const std::string& s) {
  const std::string t = lower(s);
  if (t == "genuine") return PairLabel::Genuine;
  if (t == "impostor") return PairLabel::Impostor;
  if (t == "unknown") return PairLabel::Unknown;
  throw DataError("unrecognized pair label: '" + s + "'");
}

Verdict verdict_from_string(const std::string& s) {
  const std::string t = lower(s);
  if (t == "match") return Verdict::Match;
  if (t == "non-match" || t == "nonmatch" || t == "non_match")
    return Verdict::NonMatch;
  if (t == "uncertain") return Verdict::Uncertain;
  throw DataError("unrecognized verdict: '" + s + "'");
}

PromptRegime regime_from_string(const std::string& s) {
  const std::string t = lower(s);
  if (t == "grounded") return PromptRegime::Grounded;
  if (t == "no-score" || t == "noscore" || t == "no_score")
    return PromptRegime::NoScore;
  if (t == "score-only" || t == "scoreonly" || t == "score_only")
    return PromptRegime::ScoreOnly;
  if (t == "score+decision" || t == "score-decision" || t == "score_decision" ||
      t == "scoreplusdecision")
    return PromptRegime::ScorePlusDecision;
  throw DataError("unrecognized prompt regime: '" + s + "'");
}

void PairRecord::validate() const {
  if (pair_id.empty()) throw DataError("record with empty pair_id");
  for (const auto& [name, decision] : fr_decisions) {
    if (!fr_scores.count(name))
      throw DataError("record '" + pair_id + "': fr_decisions key '" + name +
                      "' has no matching fr_scores entry");
    if (decision == Verdict::Uncertain)
      throw DataError("record '" + pair_id +
                      "': FR decisions must be match or non-match");
  }
  for (const auto& [name, score] : fr_scores) {
    if (!std::isfinite(score))
      throw DataError("record '" + pair_id + "': non-finite score for '" +
                      name + "'");
  }
  if (verdict.has_value() && !explanation.has_value())
    throw DataError("record '" + pair_id +
                    "': verdict present without explanation");
  if (embedding.has_value()) {
    for (double v : embedding->values)
      if (!std::isfinite(v))
        throw DataError("record '" + pair_id + "': non-finite embedding entry");
  }
}

}  // namespace lrexplain
