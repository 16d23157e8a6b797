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

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lrexplain/bundle.hpp"
#include "lrexplain/manifest.hpp"
#include "lrexplain/pipeline.hpp"
#include "lrexplain/prompts.hpp"
#include "lrexplain/providers.hpp"
#include "lrexplain/synth.hpp"

namespace {

using namespace lrexplain;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitProvider = 3;

std::shared_ptr<Embedder> make_embedder(const std::string& kind,
                                        const std::string& base_url,
                                        const std::string& model,
                                        const std::string& cache_path,
                                        int rpm) {
  std::shared_ptr<Embedder> inner;
  if (kind == "offline") {
    inner = std::make_shared<OfflineHashEmbedder>();
  } else if (kind == "remote") {
    if (base_url.empty())
      throw UsageError("remote embedder requires --embed-base-url");
    inner = std::make_shared<RemoteEmbedder>(
        base_url, model, std::shared_ptr<Transport>(make_http_transport(60.0)),
        3, std::make_shared<TokenBucket>(rpm));
  } else {
    throw UsageError("unknown embedder kind: " + kind);
  }
  if (!cache_path.empty())
    return std::make_shared<CachedEmbedder>(inner, cache_path);
  return inner;
}

int run_generate(const std::string& manifest_path, const std::string& out_path,
                 const std::string& regime_name, bool training,
                 const std::vector<std::string>& fr_models,
                 const std::string& template_dir, GenerationConfig cfg) {
  const PromptRegime regime = regime_from_string(regime_name);
  if (regime == PromptRegime::Grounded && !training)
    throw UsageError("grounded regime requires --training");

  Manifest manifest = parse_manifest(manifest_path);
  const auto tmpl = template_dir.empty()
                        ? default_template(regime)
                        : load_template(template_dir, regime);
  const auto models =
      fr_models.empty() ? default_fr_model_names() : fr_models;

  GenerationClient client(cfg,
                          std::shared_ptr<Transport>(
                              make_http_transport(cfg.timeout_seconds)));
  int failures = 0;
  int generated = 0;
  for (auto& rec : manifest.records) {
    if (rec.explanation) continue;  // resumable: already filled
    try {
      const auto prompt = build_prompt(rec, regime, models, tmpl);
      const auto text =
          client.generate_explanation(prompt, rec.image_a, rec.image_b);
      rec.explanation = text;
      rec.verdict = parse_verdict(text);
      rec.regime = regime;
      ++generated;
    } catch (const std::exception& e) {
      std::cerr << "record '" << rec.pair_id << "': " << e.what() << "\n";
      ++failures;
    }
  }
  serialize_manifest(manifest, out_path);
  std::cout << "generated " << generated << " explanations, " << failures
            << " failures -> " << out_path << "\n";
  return failures == 0 ? kExitOk : kExitProvider;
}

int run_train(const std::string& manifest_path, const std::string& bundle_out,
              TrainOptions options, const std::string& embedder_kind,
              const std::string& embed_base_url, const std::string& embed_model,
              const std::string& cache_path, int rpm) {
  const Manifest manifest = parse_manifest(manifest_path);
  auto embedder =
      make_embedder(embedder_kind, embed_base_url, embed_model, cache_path,
                    rpm);
  const auto result = train_bundle(manifest, embedder.get(), options);
  write_bundle(result.bundle, bundle_out);

  auto print_report = [](const char* name, const EmFitReport& r) {
    std::printf("%s: %d iterations, log-likelihood %.6f, %s (seed %llu)\n",
                name, r.iterations, r.final_log_likelihood,
                r.converged ? "converged" : "max_iter reached",
                static_cast<unsigned long long>(r.seed));
  };
  print_report("gmm_h0 (genuine)", result.report_h0);
  print_report("gmm_h1 (impostor)", result.report_h1);
  std::cout << "removed_uncertain_count: " << result.removed_uncertain_count
            << "\n"
            << "pca: d = " << result.bundle.pca.d
            << ", k = " << result.bundle.pca.k << ", retained variance = "
            << result.bundle.pca.explained_variance_ratio.sum() << "\n"
            << "bundle -> " << bundle_out << "\n";
  return kExitOk;
}

int run_score(const std::string& bundle_path, const std::string& manifest_path,
              const std::string& out_path, const std::string& embed_base_url,
              const std::string& cache_path, int rpm) {
  const ModelBundle bundle = read_bundle(bundle_path);
  const Manifest manifest = parse_manifest(manifest_path);

  std::shared_ptr<Embedder> embedder;
  if (bundle.provider_tag == OfflineHashEmbedder().provider_tag())
    embedder = make_embedder("offline", "", "", cache_path, rpm);
  else
    embedder = make_embedder("remote", embed_base_url, bundle.provider_tag,
                             cache_path, rpm);

  const auto result =
      score_manifest(bundle.gmm_h0, bundle.gmm_h1, bundle.pca, manifest,
                     *embedder, bundle.provider_tag);
  write_score_file(result.scored, out_path);
  std::cout << "scored " << result.scored.size() << " pairs";
  if (!result.skipped_pair_ids.empty()) {
    std::cout << ", skipped " << result.skipped_pair_ids.size()
              << " (no text or embedding):";
    for (const auto& id : result.skipped_pair_ids) std::cout << " " << id;
  }
  std::cout << " -> " << out_path << "\n";
  return kExitOk;
}

int run_evaluate(const std::vector<std::string>& score_files,
                 const EvaluateOptions& options) {
  const auto summaries = evaluate_score_files(score_files, options);
  for (const auto& s : summaries) {
    std::printf("%s: auc %.4f, eer %.4f, tmr@fmr=%g %.4f\n",
                s.series_name.c_str(), s.auc, s.eer_value,
                options.tmr_fmr_target, s.tmr_at_target);
  }
  std::cout << "reports -> " << options.out_dir << "\n";
  return kExitOk;
}

int run_synth(const SynthSpec& spec, int n_test_per_class,
              const std::string& out_train, const std::string& out_test) {
  const std::string tag = OfflineHashEmbedder().provider_tag();
  // Training and test draws come from the same generating mixtures but
  // disjoint RNG streams.
  SynthData train_data = generate(spec);
  Manifest train =
      to_manifest(train_data, tag, PromptRegime::Grounded, "train_");
  serialize_manifest(train, out_train);
  std::cout << "train manifest: " << train.records.size() << " records -> "
            << out_train << "\n";

  if (!out_test.empty()) {
    SynthSpec test_spec = spec;
    test_spec.n_per_class = n_test_per_class > 0 ? n_test_per_class
                                                 : spec.n_per_class;
    test_spec.seed = spec.seed + 0x9e3779b9ULL;
    SynthData test_data = generate(test_spec);
    Manifest test =
        to_manifest(test_data, tag, PromptRegime::NoScore, "test_");
    serialize_manifest(test, out_test);
    std::cout << "test manifest: " << test.records.size() << " records -> "
              << out_test << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Likelihood-ratio toolkit for explanation evidence scoring"};
  app.require_subcommand(1);
  app.set_config("--config");

  std::uint64_t seed = 0;
  int parallelism = 4;
  app.add_option("--seed", seed, "Global RNG seed")->envname("LREXPLAIN_SEED");
  app.add_option("--parallelism", parallelism, "Worker parallelism")
      ->envname("LREXPLAIN_PARALLELISM");

  // generate
  auto* gen = app.add_subcommand("generate",
                                 "Generate explanations for a manifest");
  std::string gen_manifest, gen_out, gen_regime = "no-score", gen_templates;
  bool gen_training = false;
  std::vector<std::string> gen_fr_models;
  GenerationConfig gen_cfg;
  gen->add_option("manifest", gen_manifest, "Input manifest")->required();
  gen->add_option("--out", gen_out, "Output manifest")->required();
  gen->add_option("--regime", gen_regime,
                  "grounded | no-score | score-only | score+decision");
  gen->add_flag("--training", gen_training,
                "Allow the grounded regime (training-set generation)");
  gen->add_option("--fr-models", gen_fr_models,
                  "FR model subset for score/decision prompts");
  gen->add_option("--templates", gen_templates, "Prompt template directory");
  gen->add_option("--base-url", gen_cfg.base_url, "Chat-completion base URL")
      ->envname("LREXPLAIN_BASE_URL");
  gen->add_option("--model", gen_cfg.model_name, "Generation model name");
  gen->add_option("--temperature", gen_cfg.temperature, "Sampling temperature");
  gen->add_option("--max-retries", gen_cfg.max_retries, "Retry budget");
  gen->add_option("--rpm", gen_cfg.requests_per_minute,
                  "Requests-per-minute throttle");

  // train
  auto* train = app.add_subcommand("train", "Fit PCA + class GMMs");
  std::string train_manifest, train_bundle_out, train_embedder = "offline";
  std::string train_embed_url, train_embed_model = "text-embedding-3-small";
  std::string train_cache;
  TrainOptions train_opts;
  int train_rpm = 60;
  std::string train_cov = "full";
  train->add_option("manifest", train_manifest, "Grounded training manifest")
      ->required();
  train->add_option("--bundle-out", train_bundle_out, "Bundle output path")
      ->required();
  train->add_option("-J,--components", train_opts.components,
                    "GMM components per hypothesis");
  train->add_option("--variance-target", train_opts.variance_target,
                    "PCA retained-variance target");
  train->add_option("--covariance", train_cov, "full | diagonal");
  train->add_option("--embedder", train_embedder, "offline | remote");
  train->add_option("--embed-base-url", train_embed_url,
                    "Embedding endpoint base URL")
      ->envname("LREXPLAIN_EMBED_BASE_URL");
  train->add_option("--embed-model", train_embed_model, "Embedding model");
  train->add_option("--cache", train_cache, "Embedding cache path");
  train->add_option("--rpm", train_rpm, "Requests-per-minute throttle");

  // score
  auto* score = app.add_subcommand("score", "Score a test manifest");
  std::string score_bundle, score_manifest_path, score_out;
  std::string score_embed_url, score_cache;
  int score_rpm = 60;
  score->add_option("--bundle", score_bundle, "Trained bundle")->required();
  score->add_option("manifest", score_manifest_path, "Test manifest")
      ->required();
  score->add_option("--out", score_out, "Score file output path")->required();
  score->add_option("--embed-base-url", score_embed_url,
                    "Embedding endpoint base URL")
      ->envname("LREXPLAIN_EMBED_BASE_URL");
  score->add_option("--cache", score_cache, "Embedding cache path");
  score->add_option("--rpm", score_rpm, "Requests-per-minute throttle");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "ROC / confusion / separability");
  std::vector<std::string> eval_scores;
  EvaluateOptions eval_opts;
  std::string eval_manifest;
  eval->add_option("scores", eval_scores, "Score file(s)")->required();
  eval->add_option("--out-dir", eval_opts.out_dir, "Report directory")
      ->required();
  eval->add_option("--fmr-target", eval_opts.tmr_fmr_target,
                   "Operating point for tmr@fmr");
  eval->add_option("--manifest", eval_manifest,
                   "Embedding-bearing manifest for separability reports");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic manifests");
  SynthSpec spec;
  int synth_n_test = 0;
  std::string synth_out_train, synth_out_test;
  synth->add_option("--k", spec.k, "Embedding dimension");
  synth->add_option("--n-per-class", spec.n_per_class, "Samples per class");
  synth->add_option("--delta", spec.mean_separation, "Class mean separation");
  synth->add_option("--sigma", spec.covariance_scale, "Component std dev");
  synth->add_option("--components-per-class", spec.mixture_components_per_class,
                    "Mixture components per class");
  synth->add_option("--out-train", synth_out_train, "Training manifest path")
      ->required();
  synth->add_option("--out-test", synth_out_test, "Test manifest path");
  synth->add_option("--n-test-per-class", synth_n_test,
                    "Test samples per class (default: n-per-class)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen)
      return run_generate(gen_manifest, gen_out, gen_regime, gen_training,
                          gen_fr_models, gen_templates, gen_cfg);
    if (*train) {
      train_opts.seed = seed;
      train_opts.parallelism = parallelism;
      train_opts.covariance_kind = train_cov == "diagonal"
                                       ? CovarianceKind::Diagonal
                                       : CovarianceKind::Full;
      return run_train(train_manifest, train_bundle_out, train_opts,
                       train_embedder, train_embed_url, train_embed_model,
                       train_cache, train_rpm);
    }
    if (*score)
      return run_score(score_bundle, score_manifest_path, score_out,
                       score_embed_url, score_cache, score_rpm);
    if (*eval) {
      if (!eval_manifest.empty()) eval_opts.manifest_path = eval_manifest;
      return run_evaluate(eval_scores, eval_opts);
    }
    if (*synth) {
      spec.seed = seed;
      return run_synth(spec, synth_n_test, synth_out_train, synth_out_test);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ProviderError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
