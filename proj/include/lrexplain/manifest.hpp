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

#include <iosfwd>
#include <string>

#include "lrexplain/types.hpp"

namespace lrexplain {

// Manifest files are UTF-8 JSON-lines: one record object per line.
// parse_manifest validates every record and the manifest-level invariants
// (nonempty, unique pair_id) and reports errors with line numbers.
Manifest parse_manifest(const std::string& path);
Manifest parse_manifest_stream(std::istream& in, const std::string& origin);

void serialize_manifest(const Manifest& manifest, const std::string& path);
void serialize_manifest_stream(const Manifest& manifest, std::ostream& out);

// Total and deterministic. Prefers an explicit "Match Verdict:" line;
// otherwise falls back to scanning for standalone match / non-match /
// uncertain tokens. Ambiguity maps to Uncertain.
Verdict parse_verdict(const std::string& raw_text);

struct FilterResult {
  Manifest manifest;
  int removed_count = 0;
};

// Drops records with an Uncertain verdict or an Unknown label from a
// Grounded-regime training manifest.
FilterResult filter_training(const Manifest& manifest);

}  // namespace lrexplain
