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

#include <Eigen/Dense>
#include <vector>

#include "lrexplain/errors.hpp"

namespace lrexplain {

// Linear projection fitted by SVD of the centered data matrix, retaining
// the smallest k whose cumulative explained variance reaches the target.
struct PcaModel {
  Eigen::VectorXd mean;                      // d
  Eigen::MatrixXd components;                // k x d, rows orthonormal
  Eigen::VectorXd explained_variance_ratio;  // k (retained components only)
  Eigen::VectorXd explained_variance;        // k retained eigenvalues
  double retained_variance_target = 0.97;
  int d = 0;
  int k = 0;

  Eigen::VectorXd transform(const Eigen::VectorXd& x) const;
  // Row-wise transform of an n x d matrix.
  Eigen::MatrixXd transform_rows(const Eigen::MatrixXd& rows) const;
};

// rows: n x d data matrix, one sample per row. Deterministic up to the
// fixed sign convention (largest-magnitude entry of each component row is
// positive).
PcaModel fit_pca(const Eigen::MatrixXd& rows, double variance_target);

PcaModel fit_pca(const std::vector<std::vector<double>>& vectors,
                 double variance_target);

}  // namespace lrexplain
