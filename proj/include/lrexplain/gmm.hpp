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
#include <cstdint>
#include <utility>
#include <vector>

#include "lrexplain/errors.hpp"

namespace lrexplain {

enum class Hypothesis { H0, H1 };  // H0 genuine, H1 impostor

enum class CovarianceKind { Full, Diagonal };

// Gaussian mixture with cached Cholesky factors and log-determinants for
// stable log-density evaluation. Immutable after finalize(); safe to
// share across threads.
struct GmmModel {
  Hypothesis hypothesis = Hypothesis::H0;
  CovarianceKind covariance_kind = CovarianceKind::Full;
  Eigen::VectorXd weights;                   // J, sums to 1
  std::vector<Eigen::VectorXd> means;        // J vectors of dim k
  std::vector<Eigen::MatrixXd> covariances;  // J k x k SPD matrices
  int dim = 0;

  int component_count() const { return static_cast<int>(weights.size()); }

  // Validates invariants, factors every covariance. Throws DataError if a
  // covariance is not SPD or weights do not sum to 1.
  void finalize();

  // log sum_j exp(log pi_j + log N(z | mu_j, Sigma_j)), via log-sum-exp.
  double log_density(const Eigen::VectorXd& z) const;

  // Per-component log pi_j + log N(z | mu_j, Sigma_j).
  Eigen::VectorXd component_log_joint(const Eigen::VectorXd& z) const;

  bool finalized() const { return !cholesky_.empty(); }
  const std::vector<Eigen::MatrixXd>& cholesky_factors() const {
    return cholesky_;
  }
  const std::vector<double>& log_dets() const { return log_det_; }

 private:
  std::vector<Eigen::MatrixXd> cholesky_;  // lower factors
  std::vector<double> log_det_;
  Eigen::VectorXd log_weights_;
};

GmmModel make_gmm(Hypothesis hypothesis, const Eigen::VectorXd& weights,
                  std::vector<Eigen::VectorXd> means,
                  std::vector<Eigen::MatrixXd> covariances,
                  CovarianceKind kind = CovarianceKind::Full);

struct EmFitReport {
  int iterations = 0;
  double final_log_likelihood = 0.0;
  std::vector<double> log_likelihood_trace;
  bool converged = false;
  std::uint64_t seed = 0;
};

struct GmmFitOptions {
  int components = 4;
  CovarianceKind covariance_kind = CovarianceKind::Full;
  std::uint64_t seed = 0;
  double tol = 1e-6;
  int max_iter = 200;
  double reg = 1e-6;  // added to every covariance diagonal each M-step
};

// EM with k-means++ initialization. points: n x k, one sample per row.
// Requires n >= J * (k + 1).
std::pair<GmmModel, EmFitReport> fit_gmm(const Eigen::MatrixXd& points,
                                         const GmmFitOptions& options,
                                         Hypothesis hypothesis = Hypothesis::H0);

namespace detail {
// E-step kernel: fills resp (n x J) with posterior responsibilities and
// returns the total log-likelihood. OpenMP-parallel over points with a
// deterministic blocked reduction.
double estep(const GmmModel& model, const Eigen::MatrixXd& points,
             Eigen::MatrixXd& resp);
}  // namespace detail

namespace reference {
// Naive single-threaded E-step, kept as the oracle for the parallel
// kernel.
double estep_serial(const GmmModel& model, const Eigen::MatrixXd& points,
                    Eigen::MatrixXd& resp);
}  // namespace reference

}  // namespace lrexplain
