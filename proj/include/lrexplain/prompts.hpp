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

#include <string>
#include <vector>

#include "lrexplain/types.hpp"

namespace lrexplain {

// A prompt template for one regime. user_text carries the slots
// {{label}}, {{score_lines}}, {{decision_lines}}; which slots must be
// present depends on the regime and is enforced on load.
struct PromptTemplate {
  PromptRegime regime;
  std::string system_text;
  std::string user_text;

  void validate() const;
};

// Built-in template for a regime (used when no template directory is
// configured).
PromptTemplate default_template(PromptRegime regime);

// Loads <dir>/<regime>.txt where the file holds the system text, a line
// "---", then the user text. Falls back to the built-in template when the
// file does not exist.
PromptTemplate load_template(const std::string& dir, PromptRegime regime);

struct RenderedPrompt {
  std::string system_text;
  std::string user_text;
};

// Deterministic rendering. Scores print with 4 decimal places, decisions
// as the literal words "match" / "non-match". The ground-truth label is
// rendered only under the Grounded regime.
RenderedPrompt build_prompt(const PairRecord& record, PromptRegime regime,
                            const std::vector<std::string>& fr_model_subset,
                            const PromptTemplate& tmpl);
RenderedPrompt build_prompt(const PairRecord& record, PromptRegime regime,
                            const std::vector<std::string>& fr_model_subset);

// The six FR models whose scores the prompts may reference, in canonical
// order.
std::vector<std::string> default_fr_model_names();

}  // namespace lrexplain
