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

#include "lrexplain/bundle.hpp"

#include <fstream>

#include <json.hpp>

namespace lrexplain {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = a.at(i).get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (rows.empty()) return {};
  Eigen::MatrixXd m(rows.size(), rows.at(0).size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows.at(r).size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows.at(r).at(c).get<double>();
  return m;
}

json gmm_to_json(const GmmModel& g) {
  json j;
  j["hypothesis"] = g.hypothesis == Hypothesis::H0 ? "H0" : "H1";
  j["covariance_kind"] =
      g.covariance_kind == CovarianceKind::Full ? "full" : "diagonal";
  j["weights"] = vector_to_json(g.weights);
  json means = json::array();
  for (const auto& m : g.means) means.push_back(vector_to_json(m));
  j["means"] = std::move(means);
  json covs = json::array();
  for (const auto& c : g.covariances) covs.push_back(matrix_to_json(c));
  j["covariances"] = std::move(covs);
  return j;
}

GmmModel gmm_from_json(const json& j) {
  GmmModel g;
  const std::string hyp = j.at("hypothesis").get<std::string>();
  if (hyp == "H0")
    g.hypothesis = Hypothesis::H0;
  else if (hyp == "H1")
    g.hypothesis = Hypothesis::H1;
  else
    throw DataError("bundle: unrecognized hypothesis '" + hyp + "'");
  g.covariance_kind = j.at("covariance_kind").get<std::string>() == "diagonal"
                          ? CovarianceKind::Diagonal
                          : CovarianceKind::Full;
  g.weights = vector_from_json(j.at("weights"));
  for (const auto& m : j.at("means")) g.means.push_back(vector_from_json(m));
  for (const auto& c : j.at("covariances"))
    g.covariances.push_back(matrix_from_json(c));
  g.finalize();
  return g;
}

json pca_to_json(const PcaModel& p) {
  json j;
  j["mean"] = vector_to_json(p.mean);
  j["components"] = matrix_to_json(p.components);
  j["explained_variance_ratio"] = vector_to_json(p.explained_variance_ratio);
  j["explained_variance"] = vector_to_json(p.explained_variance);
  j["retained_variance_target"] = p.retained_variance_target;
  j["d"] = p.d;
  j["k"] = p.k;
  return j;
}

PcaModel pca_from_json(const json& j) {
  PcaModel p;
  p.mean = vector_from_json(j.at("mean"));
  p.components = matrix_from_json(j.at("components"));
  p.explained_variance_ratio =
      vector_from_json(j.at("explained_variance_ratio"));
  p.explained_variance = vector_from_json(j.at("explained_variance"));
  p.retained_variance_target = j.at("retained_variance_target").get<double>();
  p.d = j.at("d").get<int>();
  p.k = j.at("k").get<int>();
  if (p.components.rows() != p.k || p.components.cols() != p.d ||
      p.mean.size() != p.d)
    throw DataError("bundle: inconsistent pca dimensions");
  return p;
}

}  // namespace

void ModelBundle::validate() const {
  if (provider_tag.empty()) throw DataError("bundle: empty provider_tag");
  if (gmm_h0.hypothesis != Hypothesis::H0)
    throw DataError("bundle: gmm_h0 must carry hypothesis H0");
  if (gmm_h1.hypothesis != Hypothesis::H1)
    throw DataError("bundle: gmm_h1 must carry hypothesis H1");
  if (gmm_h0.dim != pca.k || gmm_h1.dim != pca.k)
    throw DataError("bundle: gmm dimension does not match pca.k");
}

void write_bundle(const ModelBundle& bundle, const std::string& path) {
  bundle.validate();
  json j;
  j["format_version"] = bundle.format_version;
  j["provider_tag"] = bundle.provider_tag;
  j["pca"] = pca_to_json(bundle.pca);
  j["gmm_h0"] = gmm_to_json(bundle.gmm_h0);
  j["gmm_h1"] = gmm_to_json(bundle.gmm_h1);
  json meta = json::object();
  for (const auto& [k, v] : bundle.training_metadata) meta[k] = v;
  j["training_metadata"] = std::move(meta);

  std::ofstream out(path);
  if (!out) throw DataError("cannot write bundle file: " + path);
  out << j.dump(2) << "\n";
}

ModelBundle read_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open bundle file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("bundle " + path + ": parse error: " + e.what());
  }
  ModelBundle bundle;
  try {
    bundle.format_version = j.at("format_version").get<int>();
    if (bundle.format_version > ModelBundle::kFormatVersion)
      throw DataError("bundle " + path + ": format_version " +
                      std::to_string(bundle.format_version) +
                      " is newer than supported");
    bundle.provider_tag = j.at("provider_tag").get<std::string>();
    bundle.pca = pca_from_json(j.at("pca"));
    bundle.gmm_h0 = gmm_from_json(j.at("gmm_h0"));
    bundle.gmm_h1 = gmm_from_json(j.at("gmm_h1"));
    if (j.contains("training_metadata"))
      for (const auto& [k, v] : j.at("training_metadata").items())
        bundle.training_metadata[k] = v.get<std::string>();
  } catch (const json::exception& e) {
    throw DataError("bundle " + path + ": " + e.what());
  }
  bundle.validate();
  return bundle;
}

}  // namespace lrexplain
