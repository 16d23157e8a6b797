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

#include "lrexplain/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "lrexplain/parallel.hpp"

namespace lrexplain {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}
}  // namespace

void GmmModel::finalize() {
  const int J = component_count();
  if (J < 1) throw DataError("gmm: at least one component required");
  if (static_cast<int>(means.size()) != J ||
      static_cast<int>(covariances.size()) != J)
    throw DataError("gmm: weights/means/covariances size mismatch");
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw DataError("gmm: weights must sum to 1");
  dim = static_cast<int>(means.front().size());

  cholesky_.clear();
  log_det_.clear();
  log_weights_ = weights.array().log();
  for (int j = 0; j < J; ++j) {
    if (means[j].size() != dim || covariances[j].rows() != dim ||
        covariances[j].cols() != dim)
      throw DataError("gmm: component " + std::to_string(j) +
                      " dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(covariances[j]);
    if (llt.info() != Eigen::Success)
      throw DataError("gmm: covariance of component " + std::to_string(j) +
                      " is not positive definite");
    Eigen::MatrixXd lower = llt.matrixL();
    double log_det = 0.0;
    for (int i = 0; i < dim; ++i) {
      if (lower(i, i) <= 0.0)
        throw DataError("gmm: covariance of component " + std::to_string(j) +
                        " is numerically rank deficient");
      log_det += 2.0 * std::log(lower(i, i));
    }
    cholesky_.push_back(std::move(lower));
    log_det_.push_back(log_det);
  }
}

Eigen::VectorXd GmmModel::component_log_joint(const Eigen::VectorXd& z) const {
  if (z.size() != dim)
    throw DataError("gmm log_density: vector dimension " +
                    std::to_string(z.size()) + " does not match model dim " +
                    std::to_string(dim));
  const int J = component_count();
  Eigen::VectorXd out(J);
  for (int j = 0; j < J; ++j) {
    const Eigen::VectorXd u = cholesky_[j]
                                  .triangularView<Eigen::Lower>()
                                  .solve(z - means[j]);
    out[j] = log_weights_[j] -
             0.5 * (dim * kLog2Pi + log_det_[j] + u.squaredNorm());
  }
  return out;
}

double GmmModel::log_density(const Eigen::VectorXd& z) const {
  return log_sum_exp(component_log_joint(z));
}

GmmModel make_gmm(Hypothesis hypothesis, const Eigen::VectorXd& weights,
                  std::vector<Eigen::VectorXd> means,
                  std::vector<Eigen::MatrixXd> covariances,
                  CovarianceKind kind) {
  GmmModel model;
  model.hypothesis = hypothesis;
  model.covariance_kind = kind;
  model.weights = weights;
  model.means = std::move(means);
  model.covariances = std::move(covariances);
  model.finalize();
  return model;
}

namespace detail {

double estep(const GmmModel& model, const Eigen::MatrixXd& points,
             Eigen::MatrixXd& resp) {
  const auto n = points.rows();
  const int J = model.component_count();
  resp.resize(n, J);
  std::vector<double> point_ll(static_cast<std::size_t>(n));
  parallel_for(n, [&](std::int64_t i) {
    const Eigen::VectorXd log_joint =
        model.component_log_joint(points.row(i).transpose());
    const double lse = log_sum_exp(log_joint);
    resp.row(i) = (log_joint.array() - lse).exp();
    point_ll[static_cast<std::size_t>(i)] = lse;
  });
  return deterministic_sum(
      n, [&](std::int64_t i) { return point_ll[static_cast<std::size_t>(i)]; });
}

}  // namespace detail

namespace reference {

double estep_serial(const GmmModel& model, const Eigen::MatrixXd& points,
                    Eigen::MatrixXd& resp) {
  const auto n = points.rows();
  const int J = model.component_count();
  resp.resize(n, J);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd log_joint =
        model.component_log_joint(points.row(i).transpose());
    double m = log_joint.maxCoeff();
    double s = 0.0;
    for (int j = 0; j < J; ++j) s += std::exp(log_joint[j] - m);
    const double lse = m + std::log(s);
    for (int j = 0; j < J; ++j) resp(i, j) = std::exp(log_joint[j] - lse);
    total += lse;
  }
  return total;
}

}  // namespace reference

namespace {

// k-means++ seeding: first center uniform, then proportional to squared
// distance from the nearest chosen center.
std::vector<Eigen::Index> kmeanspp_centers(const Eigen::MatrixXd& points,
                                           int J, std::mt19937_64& rng) {
  const auto n = points.rows();
  std::vector<Eigen::Index> centers;
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.push_back(first(rng));
  Eigen::VectorXd min_d2 =
      (points.rowwise() - points.row(centers[0])).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(centers.size()) < J) {
    const double total = min_d2.sum();
    Eigen::Index pick = 0;
    if (total <= 0.0) {
      pick = first(rng);  // all points coincide with a center
    } else {
      double r = unit(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        r -= min_d2[i];
        if (r <= 0.0) {
          pick = i;
          break;
        }
        pick = i;
      }
    }
    centers.push_back(pick);
    min_d2 = min_d2.cwiseMin(
        (points.rowwise() - points.row(pick)).rowwise().squaredNorm());
  }
  return centers;
}

// M-step from soft responsibilities. Two passes: means first, then the
// centered covariance accumulation, blocked for determinism.
void mstep(const Eigen::MatrixXd& points, const Eigen::MatrixXd& resp,
           CovarianceKind kind, double reg, GmmModel& model) {
  const auto n = points.rows();
  const int k = static_cast<int>(points.cols());
  const int J = static_cast<int>(resp.cols());

  model.weights.resize(J);
  model.means.assign(J, Eigen::VectorXd::Zero(k));
  model.covariances.assign(J, Eigen::MatrixXd::Zero(k, k));

  for (int j = 0; j < J; ++j) {
    const double nk =
        deterministic_sum(n, [&](std::int64_t i) { return resp(i, j); });
    if (!(nk > 0.0) || !std::isfinite(nk))
      throw DataError("gmm fit: component " + std::to_string(j) +
                      " collapsed (zero responsibility mass)");
    model.weights[j] = nk / double(n);
    for (int c = 0; c < k; ++c)
      model.means[j][c] = deterministic_sum(n, [&](std::int64_t i) {
        return resp(i, j) * points(i, c);
      }) / nk;

    // Blocked weighted scatter; block partials combined in fixed order.
    const std::int64_t n_blocks = (n + kSumBlock - 1) / kSumBlock;
    std::vector<Eigen::MatrixXd> partials(
        static_cast<std::size_t>(n_blocks), Eigen::MatrixXd::Zero(k, k));
    const Eigen::VectorXd& mu = model.means[j];
    parallel_for(n_blocks, [&](std::int64_t b) {
      const std::int64_t lo = b * kSumBlock;
      const std::int64_t hi = std::min<std::int64_t>(n, lo + kSumBlock);
      Eigen::MatrixXd& acc = partials[static_cast<std::size_t>(b)];
      for (std::int64_t i = lo; i < hi; ++i) {
        const Eigen::VectorXd diff = points.row(i).transpose() - mu;
        acc.selfadjointView<Eigen::Lower>().rankUpdate(diff, resp(i, j));
      }
    });
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(k, k);
    for (const auto& p : partials) scatter += p;
    scatter = scatter.selfadjointView<Eigen::Lower>();
    Eigen::MatrixXd cov = scatter / nk;
    if (kind == CovarianceKind::Diagonal)
      cov = cov.diagonal().asDiagonal();
    cov.diagonal().array() += reg;
    model.covariances[j] = cov;
  }
  // Renormalize to absorb roundoff in the per-component block sums.
  model.weights /= model.weights.sum();
}

}  // namespace

std::pair<GmmModel, EmFitReport> fit_gmm(const Eigen::MatrixXd& points,
                                         const GmmFitOptions& options,
                                         Hypothesis hypothesis) {
  const auto n = points.rows();
  const int k = static_cast<int>(points.cols());
  const int J = options.components;
  if (J < 1) throw DataError("gmm fit: at least one component required");
  if (n < static_cast<Eigen::Index>(J) * (k + 1))
    throw DataError("gmm fit: need at least J*(k+1) = " +
                    std::to_string(J * (k + 1)) + " points, got " +
                    std::to_string(n));
  if (!points.allFinite()) throw DataError("gmm fit: non-finite input");

  std::mt19937_64 rng(options.seed);
  const auto centers = kmeanspp_centers(points, J, rng);

  // Hard assignment to the seeded centers gives the initial model.
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, J);
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int j = 0; j < J; ++j) {
      const double d2 = (points.row(i) - points.row(centers[j])).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = j;
      }
    }
    resp(i, best) = 1.0;
  }

  GmmModel model;
  model.hypothesis = hypothesis;
  model.covariance_kind = options.covariance_kind;
  mstep(points, resp, options.covariance_kind, options.reg, model);
  model.finalize();

  EmFitReport report;
  report.seed = options.seed;
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    const double ll = detail::estep(model, points, resp);
    report.log_likelihood_trace.push_back(ll);
    report.iterations = iter;
    report.final_log_likelihood = ll;
    if (std::isfinite(prev_ll) &&
        std::abs(ll - prev_ll) < options.tol * std::abs(prev_ll)) {
      report.converged = true;
      break;
    }
    prev_ll = ll;
    mstep(points, resp, options.covariance_kind, options.reg, model);
    model.finalize();
  }
  return {std::move(model), std::move(report)};
}

}  // namespace lrexplain
