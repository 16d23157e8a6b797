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

#include "lrexplain/synth.hpp"

#include <random>

namespace lrexplain {

void SynthSpec::validate() const {
  if (k < 1) throw UsageError("synth: k must be positive");
  if (n_per_class < 2) throw UsageError("synth: n_per_class must be >= 2");
  if (mean_separation < 0.0) throw UsageError("synth: separation must be >= 0");
  if (covariance_scale <= 0.0) throw UsageError("synth: sigma must be > 0");
  if (mixture_components_per_class < 1)
    throw UsageError("synth: need at least one mixture component per class");
}

namespace {

// Component means sit at the class center plus fixed offsets along the
// first axis, spaced 1.5 sigma apart, so the generating density is fully
// known.
GmmModel class_mixture(Hypothesis hypothesis, double center, int k,
                       int components, double sigma) {
  Eigen::VectorXd weights =
      Eigen::VectorXd::Constant(components, 1.0 / components);
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs;
  for (int c = 0; c < components; ++c) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(k);
    mu[0] = center + (c - (components - 1) / 2.0) * 1.5 * sigma;
    means.push_back(mu);
    covs.push_back(Eigen::MatrixXd::Identity(k, k) * sigma * sigma);
  }
  return make_gmm(hypothesis, weights, std::move(means), std::move(covs));
}

Eigen::MatrixXd sample_from(const GmmModel& model, int n, int k,
                            std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd out(n, k);
  for (int i = 0; i < n; ++i) {
    double r = unit(rng);
    int comp = 0;
    for (int j = 0; j < model.component_count(); ++j) {
      r -= model.weights[j];
      if (r <= 0.0) {
        comp = j;
        break;
      }
      comp = j;
    }
    const double sigma = std::sqrt(model.covariances[comp](0, 0));
    for (int c = 0; c < k; ++c)
      out(i, c) = model.means[comp][c] + sigma * gauss(rng);
  }
  return out;
}

}  // namespace

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  SynthData data;
  const double half = spec.mean_separation / 2.0;
  data.true_genuine =
      class_mixture(Hypothesis::H0, half, spec.k,
                    spec.mixture_components_per_class, spec.covariance_scale);
  data.true_impostor =
      class_mixture(Hypothesis::H1, -half, spec.k,
                    spec.mixture_components_per_class, spec.covariance_scale);

  std::mt19937_64 rng(spec.seed);
  data.genuine = sample_from(data.true_genuine, spec.n_per_class, spec.k, rng);
  data.impostor =
      sample_from(data.true_impostor, spec.n_per_class, spec.k, rng);
  return data;
}

double analytic_log_lr(const SynthData& data, const Eigen::VectorXd& z) {
  return data.true_genuine.log_density(z) - data.true_impostor.log_density(z);
}

Manifest to_manifest(const SynthData& data, const std::string& provider_tag,
                     PromptRegime regime, const std::string& id_prefix) {
  Manifest m;
  const int k = static_cast<int>(data.genuine.cols());
  auto add = [&](const Eigen::MatrixXd& rows, PairLabel label,
                 const std::string& tag) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      PairRecord r;
      r.pair_id = id_prefix + tag + std::to_string(i);
      r.image_a = r.pair_id + "_a";
      r.image_b = r.pair_id + "_b";
      r.label = label;
      r.regime = regime;
      EmbeddingVector e;
      e.provider_tag = provider_tag;
      e.values.resize(k);
      for (int c = 0; c < k; ++c) e.values[static_cast<std::size_t>(c)] = rows(i, c);
      r.embedding = std::move(e);
      m.records.push_back(std::move(r));
    }
  };
  add(data.genuine, PairLabel::Genuine, "g");
  add(data.impostor, PairLabel::Impostor, "i");
  m.metadata["dataset"] = "synthetic";
  m.metadata["regime"] = to_string(regime);
  return m;
}

}  // namespace lrexplain
