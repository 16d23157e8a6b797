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

#include "lrexplain/lr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "lrexplain/providers.hpp"

namespace lrexplain {

using nlohmann::json;

double sigmoid_of_log_lr(double log_lr) {
  const double x = std::clamp(log_lr, -kLogLrClamp, kLogLrClamp);
  // Branch keeps exp() argument non-positive on both sides.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

LrResult score_pair(const GmmModel& genuine_model,
                    const GmmModel& impostor_model, const Eigen::VectorXd& z) {
  if (genuine_model.hypothesis != Hypothesis::H0)
    throw DataError("score_pair: genuine model must carry hypothesis H0");
  if (impostor_model.hypothesis != Hypothesis::H1)
    throw DataError("score_pair: impostor model must carry hypothesis H1");
  if (genuine_model.dim != impostor_model.dim)
    throw DataError("score_pair: model dimensions disagree");

  LrResult r;
  r.log_p0 = genuine_model.log_density(z);
  r.log_p1 = impostor_model.log_density(z);
  r.log_lr = r.log_p0 - r.log_p1;
  r.s_expl = sigmoid_of_log_lr(r.log_lr);
  return r;
}

ScoreManifestResult score_manifest(const GmmModel& genuine_model,
                                   const GmmModel& impostor_model,
                                   const PcaModel& pca,
                                   const Manifest& manifest,
                                   Embedder& embedder,
                                   const std::string& provider_tag) {
  ScoreManifestResult result;
  for (const auto& rec : manifest.records) {
    EmbeddingVector emb;
    if (rec.embedding) {
      if (rec.embedding->provider_tag != provider_tag)
        throw DataError("record '" + rec.pair_id +
                        "': embedding provider tag '" +
                        rec.embedding->provider_tag +
                        "' does not match trained bundle tag '" +
                        provider_tag + "'");
      emb = *rec.embedding;
    } else if (rec.explanation) {
      if (embedder.provider_tag() != provider_tag)
        throw DataError("embedder tag '" + embedder.provider_tag() +
                        "' does not match trained bundle tag '" +
                        provider_tag + "'");
      emb = embedder.embed(*rec.explanation);
    } else {
      result.skipped_pair_ids.push_back(rec.pair_id);
      continue;
    }
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(
        emb.values.data(), static_cast<Eigen::Index>(emb.values.size()));
    const Eigen::VectorXd z = pca.transform(x);

    ScoredPair sp;
    sp.pair_id = rec.pair_id;
    sp.label = rec.label;
    sp.regime = rec.regime;
    sp.verdict = rec.verdict;
    sp.lr = score_pair(genuine_model, impostor_model, z);
    result.scored.push_back(std::move(sp));
  }
  return result;
}

void write_score_file(const std::vector<ScoredPair>& scored,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write score file: " + path);
  for (const auto& sp : scored) {
    json j;
    j["pair_id"] = sp.pair_id;
    j["label"] = to_string(sp.label);
    j["regime"] = to_string(sp.regime);
    j["log_p0"] = sp.lr.log_p0;
    j["log_p1"] = sp.lr.log_p1;
    j["log_lr"] = sp.lr.log_lr;
    j["s_expl"] = sp.lr.s_expl;
    if (sp.verdict) j["verdict"] = to_string(*sp.verdict);
    out << j.dump() << "\n";
  }
}

std::vector<ScoredPair> read_score_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open score file: " + path);
  std::vector<ScoredPair> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      ScoredPair sp;
      sp.pair_id = j.at("pair_id").get<std::string>();
      sp.label = pair_label_from_string(j.at("label").get<std::string>());
      sp.regime = regime_from_string(j.at("regime").get<std::string>());
      sp.lr.log_p0 = j.value("log_p0", 0.0);
      sp.lr.log_p1 = j.value("log_p1", 0.0);
      sp.lr.log_lr = j.at("log_lr").get<double>();
      sp.lr.s_expl = j.at("s_expl").get<double>();
      if (j.contains("verdict"))
        sp.verdict = verdict_from_string(j.at("verdict").get<std::string>());
      out.push_back(std::move(sp));
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": malformed score line: " + e.what());
    }
  }
  return out;
}

}  // namespace lrexplain
