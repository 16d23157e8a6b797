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

#include "lrexplain/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace lrexplain {

using nlohmann::json;

TrainResult train_bundle(const Manifest& grounded_manifest, Embedder* embedder,
                         const TrainOptions& options) {
  auto filtered = filter_training(grounded_manifest);
  const auto& records = filtered.manifest.records;
  if (records.empty())
    throw DataError("training manifest: no usable records after filtering");

  // Resolve every record to an embedding; missing texts go through the
  // embedder with bounded parallelism.
  std::string provider_tag;
  std::vector<const PairRecord*> needs_embedding;
  for (const auto& r : records) {
    if (r.embedding) {
      if (provider_tag.empty())
        provider_tag = r.embedding->provider_tag;
      else if (provider_tag != r.embedding->provider_tag)
        throw DataError("training manifest: mixed embedding provider tags ('" +
                        provider_tag + "' vs '" +
                        r.embedding->provider_tag + "')");
    } else if (r.explanation) {
      needs_embedding.push_back(&r);
    } else {
      throw DataError("training manifest: record '" + r.pair_id +
                      "' has neither explanation nor embedding");
    }
  }
  std::vector<EmbeddingVector> fresh;
  if (!needs_embedding.empty()) {
    if (!embedder)
      throw DataError("training manifest has unembedded records and no "
                      "embedder is configured");
    if (!provider_tag.empty() && embedder->provider_tag() != provider_tag)
      throw DataError("embedder tag '" + embedder->provider_tag() +
                      "' does not match precomputed embedding tag '" +
                      provider_tag + "'");
    provider_tag = embedder->provider_tag();
    std::vector<std::string> texts;
    texts.reserve(needs_embedding.size());
    for (const auto* r : needs_embedding) texts.push_back(*r->explanation);
    auto batch = embed_batch(texts, *embedder, options.parallelism);
    if (!batch.failures.empty())
      throw ProviderError(ProviderError::Kind::Network,
                          std::to_string(batch.failures.size()) +
                              " embedding calls failed; first: " +
                              batch.failures.front().message);
    for (auto& v : batch.vectors) fresh.push_back(std::move(*v));
  }

  // Assemble the data matrix in record order.
  const int d = !fresh.empty() ? fresh.front().dim()
                               : records.front().embedding->dim();
  Eigen::MatrixXd rows(records.size(), d);
  std::vector<PairLabel> labels(records.size());
  std::size_t fresh_i = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const EmbeddingVector& e = r.embedding ? *r.embedding : fresh[fresh_i++];
    if (e.dim() != d)
      throw DataError("training manifest: embedding dimension mismatch at '" +
                      r.pair_id + "'");
    rows.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::VectorXd>(e.values.data(), d);
    labels[i] = r.label;
  }

  // Joint PCA on the union keeps both hypotheses in one space.
  TrainResult result;
  result.removed_uncertain_count = filtered.removed_count;
  result.bundle.provider_tag = provider_tag;
  result.bundle.pca = fit_pca(rows, options.variance_target);
  const Eigen::MatrixXd reduced = result.bundle.pca.transform_rows(rows);

  const auto n_gen = std::count(labels.begin(), labels.end(),
                                PairLabel::Genuine);
  const auto n_imp = static_cast<Eigen::Index>(labels.size()) - n_gen;
  Eigen::MatrixXd gen(n_gen, result.bundle.pca.k);
  Eigen::MatrixXd imp(n_imp, result.bundle.pca.k);
  Eigen::Index gi = 0, ii = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == PairLabel::Genuine)
      gen.row(gi++) = reduced.row(static_cast<Eigen::Index>(i));
    else
      imp.row(ii++) = reduced.row(static_cast<Eigen::Index>(i));
  }

  GmmFitOptions fit;
  fit.components = options.components;
  fit.covariance_kind = options.covariance_kind;
  fit.seed = options.seed;
  fit.tol = options.tol;
  fit.max_iter = options.max_iter;
  fit.reg = options.reg;

  auto [h0, rep0] = fit_gmm(gen, fit, Hypothesis::H0);
  fit.seed = options.seed + 1;
  auto [h1, rep1] = fit_gmm(imp, fit, Hypothesis::H1);
  result.bundle.gmm_h0 = std::move(h0);
  result.bundle.gmm_h1 = std::move(h1);
  result.report_h0 = std::move(rep0);
  result.report_h1 = std::move(rep1);

  auto meta_it = grounded_manifest.metadata.find("dataset");
  result.bundle.training_metadata["dataset"] =
      meta_it != grounded_manifest.metadata.end() ? meta_it->second : "";
  result.bundle.training_metadata["regime"] = "grounded";
  result.bundle.training_metadata["removed_uncertain_count"] =
      std::to_string(filtered.removed_count);
  result.bundle.training_metadata["seed"] = std::to_string(options.seed);
  result.bundle.training_metadata["components"] =
      std::to_string(options.components);
  result.bundle.training_metadata["variance_target"] =
      std::to_string(options.variance_target);
  result.bundle.validate();
  return result;
}

namespace {

std::string series_name_for(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

void write_roc_csv(const RocCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "fmr,tmr,threshold\n";
  out.precision(17);
  for (const auto& p : curve.points)
    out << p.fmr << "," << p.tmr << "," << p.threshold << "\n";
}

json confusion_to_json(const ConfusionMatrix3x2& m) {
  json j;
  j["rows"] = {"genuine", "impostor"};
  j["cols"] = {"match", "non-match", "uncertain"};
  j["raw_counts"] = {m.raw_counts[0], m.raw_counts[1]};
  j["proportions"] = {m.proportions[0], m.proportions[1]};
  j["display"] = {
      {m.cell_percent(0, 0), m.cell_percent(0, 1), m.cell_percent(0, 2)},
      {m.cell_percent(1, 0), m.cell_percent(1, 1), m.cell_percent(1, 2)}};
  j["empty_row"] = {m.empty_row[0], m.empty_row[1]};
  return j;
}

json separability_to_json(const SeparabilityReport& r) {
  json j;
  auto put = [&](const char* key, double v) {
    if (std::isinf(v))
      j[key] = "inf";
    else
      j[key] = v;
  };
  put("silhouette", r.silhouette);
  put("davies_bouldin", r.davies_bouldin);
  put("calinski_harabasz", r.calinski_harabasz);
  put("inter_intra_ratio", r.inter_intra_ratio);
  put("fisher_ratio", r.fisher_ratio);
  j["degenerate_within_scatter"] = r.degenerate_within_scatter;
  j["space"] = r.space == EmbeddingSpace::OriginalEmbedding
                   ? "original_embedding"
                   : "pca_reduced";
  // The inter/intra and Fisher definitions are normative for this
  // toolkit; recorded so reports are self-describing.
  j["definitions"] = {
      {"inter_intra_ratio",
       "mean pairwise inter-class distance / mean pairwise intra-class "
       "distance (pooled over both classes)"},
      {"fisher_ratio",
       "||mu0 - mu1||^2 / (tr(Sigma0) + tr(Sigma1)), sample covariances"}};
  return j;
}

}  // namespace

std::vector<EvaluateSummary> evaluate_score_files(
    const std::vector<std::string>& score_files,
    const EvaluateOptions& options) {
  if (score_files.empty()) throw UsageError("evaluate: no score files given");
  std::filesystem::create_directories(options.out_dir);

  std::vector<EvaluateSummary> summaries;
  json all_summaries = json::array();

  for (const auto& path : score_files) {
    const auto scored = read_score_file(path);
    if (scored.empty()) throw UsageError("score file is empty: " + path);

    std::vector<double> gen_scores, imp_scores;
    std::vector<std::pair<PairLabel, Verdict>> verdict_records;
    std::vector<std::string> unlabeled;
    for (const auto& sp : scored) {
      if (sp.label == PairLabel::Genuine)
        gen_scores.push_back(sp.lr.s_expl);
      else if (sp.label == PairLabel::Impostor)
        imp_scores.push_back(sp.lr.s_expl);
      else {
        unlabeled.push_back(sp.pair_id);
        continue;
      }
      if (sp.verdict) verdict_records.emplace_back(sp.label, *sp.verdict);
    }
    if (gen_scores.empty() || imp_scores.empty())
      throw DataError(path + ": need labeled genuine and impostor scores");

    EvaluateSummary s;
    s.score_file = path;
    s.series_name = series_name_for(path);
    const auto curve = roc_from_scores(gen_scores, imp_scores);
    s.auc = curve.auc;
    s.eer_value = eer(curve);
    s.tmr_at_target = tmr_at_fmr(curve, options.tmr_fmr_target);
    write_roc_csv(curve, options.out_dir + "/roc_" + s.series_name + ".csv");

    json j;
    j["score_file"] = path;
    j["series"] = s.series_name;
    j["auc"] = s.auc;
    j["eer"] = s.eer_value;
    j["tmr_fmr_target"] = options.tmr_fmr_target;
    j["tmr_at_target"] = s.tmr_at_target;
    j["scored"] = scored.size();
    j["unlabeled_skipped"] = unlabeled;
    if (!verdict_records.empty()) {
      s.confusion_matrix = confusion(verdict_records);
      j["confusion"] = confusion_to_json(*s.confusion_matrix);
    }
    all_summaries.push_back(std::move(j));
    summaries.push_back(std::move(s));
  }

  json top;
  top["series"] = std::move(all_summaries);

  if (options.manifest_path) {
    const auto manifest = parse_manifest(*options.manifest_path);
    std::vector<Eigen::VectorXd> gen_vecs, imp_vecs;
    int d = -1;
    for (const auto& r : manifest.records) {
      if (!r.embedding || r.label == PairLabel::Unknown) continue;
      if (d < 0) d = r.embedding->dim();
      if (r.embedding->dim() != d)
        throw DataError("evaluate: embedding dimension mismatch at '" +
                        r.pair_id + "'");
      Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(
          r.embedding->values.data(), d);
      (r.label == PairLabel::Genuine ? gen_vecs : imp_vecs)
          .push_back(std::move(v));
    }
    if (gen_vecs.size() >= 2 && imp_vecs.size() >= 2) {
      Eigen::MatrixXd gen(gen_vecs.size(), d), imp(imp_vecs.size(), d);
      for (std::size_t i = 0; i < gen_vecs.size(); ++i)
        gen.row(static_cast<Eigen::Index>(i)) = gen_vecs[i];
      for (std::size_t i = 0; i < imp_vecs.size(); ++i)
        imp.row(static_cast<Eigen::Index>(i)) = imp_vecs[i];
      const auto report =
          separability(gen, imp, EmbeddingSpace::OriginalEmbedding);
      top["separability"] = separability_to_json(report);

      Eigen::MatrixXd all(gen.rows() + imp.rows(), d);
      all.topRows(gen.rows()) = gen;
      all.bottomRows(imp.rows()) = imp;
      std::vector<PairLabel> labels(gen_vecs.size(), PairLabel::Genuine);
      labels.insert(labels.end(), imp_vecs.size(), PairLabel::Impostor);
      const auto projected = project_2d(all, labels);
      std::ofstream proj(options.out_dir + "/projection_2d.csv");
      proj << "x,y,label\n";
      proj.precision(17);
      for (const auto& p : projected)
        proj << p.x << "," << p.y << "," << to_string(p.label) << "\n";
    }
  }

  std::ofstream out(options.out_dir + "/summary.json");
  if (!out) throw DataError("cannot write evaluation summary");
  out << top.dump(2) << "\n";
  return summaries;
}

}  // namespace lrexplain
