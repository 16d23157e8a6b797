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

#include "lrexplain/pca.hpp"

#include <cmath>

namespace lrexplain {

Eigen::VectorXd PcaModel::transform(const Eigen::VectorXd& x) const {
  if (x.size() != d)
    throw DataError("pca transform: vector dimension " +
                    std::to_string(x.size()) + " does not match model d = " +
                    std::to_string(d));
  return components * (x - mean);
}

Eigen::MatrixXd PcaModel::transform_rows(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != d)
    throw DataError("pca transform: row dimension does not match model");
  return (rows.rowwise() - mean.transpose()) * components.transpose();
}

PcaModel fit_pca(const Eigen::MatrixXd& rows, double variance_target) {
  const auto n = rows.rows();
  const auto d = rows.cols();
  if (n < 2) throw DataError("pca fit requires at least 2 samples");
  if (variance_target <= 0.0 || variance_target > 1.0)
    throw DataError("pca variance target must be in (0, 1]");
  if (!rows.allFinite()) throw DataError("pca fit: non-finite input");

  PcaModel model;
  model.retained_variance_target = variance_target;
  model.d = static_cast<int>(d);
  model.mean = rows.colwise().mean();

  Eigen::MatrixXd centered = rows.rowwise() - model.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();

  // Variance along component j is sv_j^2 / (n - 1); the thin SVD carries
  // all nonzero directions, so their sum is the total variance.
  Eigen::VectorXd variances = sv.array().square() / double(n - 1);
  const double total = variances.sum();
  if (total <= 0.0)
    throw DataError("pca fit: zero total variance (all samples identical)");

  int k = 0;
  double cumulative = 0.0;
  for (Eigen::Index j = 0; j < variances.size(); ++j) {
    cumulative += variances[j] / total;
    ++k;
    if (cumulative >= variance_target) break;
  }
  model.k = k;
  model.components = svd.matrixV().leftCols(k).transpose();
  model.explained_variance = variances.head(k);
  model.explained_variance_ratio = variances.head(k) / total;

  // Sign convention: largest-magnitude entry of each row is positive.
  for (int j = 0; j < k; ++j) {
    Eigen::Index arg;
    model.components.row(j).cwiseAbs().maxCoeff(&arg);
    if (model.components(j, arg) < 0.0) model.components.row(j) *= -1.0;
  }
  return model;
}

PcaModel fit_pca(const std::vector<std::vector<double>>& vectors,
                 double variance_target) {
  if (vectors.size() < 2) throw DataError("pca fit requires at least 2 samples");
  const auto d = vectors.front().size();
  Eigen::MatrixXd rows(vectors.size(), d);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != d)
      throw DataError("pca fit: dimension mismatch at sample " +
                      std::to_string(i));
    rows.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::VectorXd>(vectors[i].data(),
                                          static_cast<Eigen::Index>(d));
  }
  return fit_pca(rows, variance_target);
}

}  // namespace lrexplain
