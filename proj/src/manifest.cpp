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

#include "lrexplain/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace lrexplain {

using nlohmann::json;

namespace {

json record_to_json(const PairRecord& r) {
  json j;
  j["pair_id"] = r.pair_id;
  j["image_a"] = r.image_a;
  j["image_b"] = r.image_b;
  j["label"] = to_string(r.label);
  j["regime"] = to_string(r.regime);
  json scores = json::object();
  for (const auto& [k, v] : r.fr_scores) scores[k] = v;
  j["fr_scores"] = scores;
  json decisions = json::object();
  for (const auto& [k, v] : r.fr_decisions) decisions[k] = to_string(v);
  j["fr_decisions"] = decisions;
  if (r.explanation) j["explanation"] = *r.explanation;
  if (r.verdict) j["verdict"] = to_string(*r.verdict);
  if (r.embedding) {
    j["embedding"] = r.embedding->values;
    j["embedding_provider"] = r.embedding->provider_tag;
  }
  return j;
}

PairRecord record_from_json(const json& j) {
  PairRecord r;
  r.pair_id = j.at("pair_id").get<std::string>();
  r.image_a = j.at("image_a").get<std::string>();
  r.image_b = j.at("image_b").get<std::string>();
  r.label = pair_label_from_string(j.at("label").get<std::string>());
  r.regime = regime_from_string(j.at("regime").get<std::string>());
  if (j.contains("fr_scores"))
    for (const auto& [k, v] : j.at("fr_scores").items())
      r.fr_scores[k] = v.get<double>();
  if (j.contains("fr_decisions"))
    for (const auto& [k, v] : j.at("fr_decisions").items())
      r.fr_decisions[k] = verdict_from_string(v.get<std::string>());
  if (j.contains("explanation"))
    r.explanation = j.at("explanation").get<std::string>();
  if (j.contains("verdict"))
    r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  if (j.contains("embedding")) {
    EmbeddingVector e;
    e.values = j.at("embedding").get<std::vector<double>>();
    if (j.contains("embedding_provider"))
      e.provider_tag = j.at("embedding_provider").get<std::string>();
    r.embedding = std::move(e);
  }
  r.validate();
  return r;
}

}  // namespace

Manifest parse_manifest_stream(std::istream& in, const std::string& origin) {
  Manifest m;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() ||
        std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return std::isspace(c); }))
      continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(origin + ":" + std::to_string(line_no) +
                      ": malformed record: " + e.what());
    }
    if (j.is_object() && j.contains("__meta__")) {
      for (const auto& [k, v] : j.at("__meta__").items())
        m.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
      continue;
    }
    PairRecord r;
    try {
      r = record_from_json(j);
    } catch (const json::exception& e) {
      throw DataError(origin + ":" + std::to_string(line_no) +
                      ": malformed record: " + e.what());
    } catch (const DataError& e) {
      throw DataError(origin + ":" + std::to_string(line_no) + ": " +
                      e.what());
    }
    if (!seen_ids.insert(r.pair_id).second)
      throw DataError(origin + ":" + std::to_string(line_no) +
                      ": duplicate pair_id '" + r.pair_id + "'");
    m.records.push_back(std::move(r));
  }
  if (m.records.empty())
    throw DataError(origin + ": manifest contains no records");
  return m;
}

Manifest parse_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest file: " + path);
  return parse_manifest_stream(in, path);
}

void serialize_manifest_stream(const Manifest& manifest, std::ostream& out) {
  if (!manifest.metadata.empty()) {
    json meta = json::object();
    for (const auto& [k, v] : manifest.metadata) meta[k] = v;
    out << json{{"__meta__", meta}}.dump() << "\n";
  }
  for (const auto& r : manifest.records) out << record_to_json(r).dump() << "\n";
}

void serialize_manifest(const Manifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest file: " + path);
  serialize_manifest_stream(manifest, out);
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Classifies the text after "match verdict:". Non-match is checked before
// match since the former contains the latter as a substring.
std::optional<Verdict> classify_fragment(const std::string& fragment) {
  static const std::regex non_match_re("\\bnon[\\s_-]?match\\b");
  static const std::regex match_re("\\bmatch\\b");
  static const std::regex uncertain_re("\\buncertain\\b|\\bundecided\\b");
  const bool has_uncertain = std::regex_search(fragment, uncertain_re);
  const bool has_non_match = std::regex_search(fragment, non_match_re);
  const bool has_match =
      std::regex_search(std::regex_replace(fragment, non_match_re, ""),
                        match_re);
  const int hits = (has_uncertain ? 1 : 0) + (has_non_match ? 1 : 0) +
                   (has_match ? 1 : 0);
  if (hits != 1) {
    if (hits == 0) return std::nullopt;
    return Verdict::Uncertain;  // contradictory fragment
  }
  if (has_uncertain) return Verdict::Uncertain;
  if (has_non_match) return Verdict::NonMatch;
  return Verdict::Match;
}

}  // namespace

Verdict parse_verdict(const std::string& raw_text) {
  const std::string text = lower(raw_text);

  // Pass 1: explicit "match verdict:" line, taken as authoritative.
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    static const std::regex heading_re("^[\\s*#>-]*match\\s*verdict\\s*:");
    std::smatch m;
    if (std::regex_search(line, m, heading_re)) {
      const std::string rest = line.substr(m.position(0) + m.length(0));
      if (auto v = classify_fragment(rest)) return *v;
      return Verdict::Uncertain;
    }
  }

  // Pass 2: standalone tokens anywhere in the text; ties or absence are
  // Uncertain.
  if (auto v = classify_fragment(text)) return *v;
  return Verdict::Uncertain;
}

FilterResult filter_training(const Manifest& manifest) {
  FilterResult result;
  result.manifest.metadata = manifest.metadata;
  for (const auto& r : manifest.records) {
    const bool uncertain = r.verdict && *r.verdict == Verdict::Uncertain;
    if (uncertain || r.label == PairLabel::Unknown) {
      ++result.removed_count;
      continue;
    }
    result.manifest.records.push_back(r);
  }
  return result;
}

}  // namespace lrexplain
