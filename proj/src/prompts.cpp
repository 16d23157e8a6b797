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

#include "lrexplain/prompts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lrexplain {

namespace {

constexpr const char* kSystemText =
    "You are a forensic face examiner. You compare two face images and "
    "explain your reasoning. Always answer using exactly this structure:\n"
    "Match Verdict: <match | non-match | uncertain>\n"
    "Similarities: <observed similarities between the two faces>\n"
    "Differences: <observed differences between the two faces>\n";

constexpr const char* kOutputReminder =
    "Respond with the headings \"Match Verdict\", \"Similarities\" and "
    "\"Differences\" only.";

std::string base_user_text(const std::string& extra) {
  std::ostringstream out;
  out << "Compare the two attached face images and decide whether they show "
         "the same person.\n";
  if (!extra.empty()) out << extra;
  out << kOutputReminder;
  return out.str();
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::string replace_slot(std::string text, const std::string& slot,
                         const std::string& value) {
  for (auto pos = text.find(slot); pos != std::string::npos;
       pos = text.find(slot, pos + value.size()))
    text.replace(pos, slot.size(), value);
  return text;
}

std::string regime_file_stem(PromptRegime regime) {
  switch (regime) {
    case PromptRegime::Grounded: return "grounded";
    case PromptRegime::NoScore: return "no_score";
    case PromptRegime::ScoreOnly: return "score_only";
    case PromptRegime::ScorePlusDecision: return "score_decision";
  }
  return "no_score";
}

}  // namespace

void PromptTemplate::validate() const {
  const bool has_label = contains(user_text, "{{label}}");
  const bool has_scores = contains(user_text, "{{score_lines}}");
  const bool has_decisions = contains(user_text, "{{decision_lines}}");
  auto fail = [&](const std::string& msg) {
    throw DataError("prompt template for regime '" + to_string(regime) +
                    "': " + msg);
  };
  switch (regime) {
    case PromptRegime::Grounded:
      if (!has_label) fail("missing {{label}} slot");
      break;
    case PromptRegime::NoScore:
      if (has_label || has_scores || has_decisions)
        fail("must contain no label/score/decision slots");
      break;
    case PromptRegime::ScoreOnly:
      if (has_label) fail("must not contain a label slot");
      if (!has_scores) fail("missing {{score_lines}} slot");
      if (has_decisions) fail("must not contain a decision slot");
      break;
    case PromptRegime::ScorePlusDecision:
      if (has_label) fail("must not contain a label slot");
      if (!has_scores) fail("missing {{score_lines}} slot");
      if (!has_decisions) fail("missing {{decision_lines}} slot");
      break;
  }
}

PromptTemplate default_template(PromptRegime regime) {
  PromptTemplate t;
  t.regime = regime;
  t.system_text = kSystemText;
  switch (regime) {
    case PromptRegime::Grounded:
      t.user_text = base_user_text(
          "For this pair the ground truth is known: the pair is {{label}}. "
          "Describe the visual evidence consistent with that outcome.\n");
      break;
    case PromptRegime::NoScore:
      t.user_text = base_user_text("");
      break;
    case PromptRegime::ScoreOnly:
      t.user_text = base_user_text(
          "Automated face recognition similarity scores for this pair:\n"
          "{{score_lines}}");
      break;
    case PromptRegime::ScorePlusDecision:
      t.user_text = base_user_text(
          "Automated face recognition similarity scores for this pair:\n"
          "{{score_lines}}"
          "Automated decisions at a 0.01% false match rate threshold:\n"
          "{{decision_lines}}");
      break;
  }
  t.validate();
  return t;
}

PromptTemplate load_template(const std::string& dir, PromptRegime regime) {
  const std::string path = dir + "/" + regime_file_stem(regime) + ".txt";
  std::ifstream in(path);
  if (!in) return default_template(regime);
  std::ostringstream system_part, user_part;
  std::string line;
  bool past_separator = false;
  while (std::getline(in, line)) {
    if (!past_separator && line == "---") {
      past_separator = true;
      continue;
    }
    (past_separator ? user_part : system_part) << line << "\n";
  }
  if (!past_separator)
    throw DataError("prompt template " + path + ": missing '---' separator");
  PromptTemplate t;
  t.regime = regime;
  t.system_text = system_part.str();
  t.user_text = user_part.str();
  t.validate();
  return t;
}

RenderedPrompt build_prompt(const PairRecord& record, PromptRegime regime,
                            const std::vector<std::string>& fr_model_subset,
                            const PromptTemplate& tmpl) {
  if (tmpl.regime != regime)
    throw UsageError("template regime does not match requested regime");
  tmpl.validate();

  if (regime == PromptRegime::Grounded && record.label == PairLabel::Unknown)
    throw DataError("record '" + record.pair_id +
                    "': grounded prompt requires a known label");

  std::string score_lines, decision_lines;
  const bool needs_scores = regime == PromptRegime::ScoreOnly ||
                            regime == PromptRegime::ScorePlusDecision;
  const bool needs_decisions = regime == PromptRegime::ScorePlusDecision;
  if (needs_scores) {
    for (const auto& name : fr_model_subset) {
      auto it = record.fr_scores.find(name);
      if (it == record.fr_scores.end())
        throw DataError("record '" + record.pair_id + "': no FR score for '" +
                        name + "'");
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.4f", it->second);
      score_lines += "- " + name + ": " + buf + "\n";
    }
  }
  if (needs_decisions) {
    for (const auto& name : fr_model_subset) {
      auto it = record.fr_decisions.find(name);
      if (it == record.fr_decisions.end())
        throw DataError("record '" + record.pair_id +
                        "': no FR decision for '" + name + "'");
      decision_lines += "- " + name + ": " + to_string(it->second) + "\n";
    }
  }

  RenderedPrompt out;
  out.system_text = tmpl.system_text;
  std::string user = tmpl.user_text;
  if (regime == PromptRegime::Grounded)
    user = replace_slot(user, "{{label}}", to_string(record.label));
  user = replace_slot(user, "{{score_lines}}", score_lines);
  user = replace_slot(user, "{{decision_lines}}", decision_lines);
  out.user_text = user;
  return out;
}

RenderedPrompt build_prompt(const PairRecord& record, PromptRegime regime,
                            const std::vector<std::string>& fr_model_subset) {
  return build_prompt(record, regime, fr_model_subset,
                      default_template(regime));
}

std::vector<std::string> default_fr_model_names() {
  return {"ArcFace",           "AdaFace",
          "MagFace",           "FaceNet-VGGFace",
          "FaceNet-CasiaWebFace", "KPRPE"};
}

}  // namespace lrexplain
