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

#include "lrexplain/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "lrexplain/errors.hpp"
#include "lrexplain/parallel.hpp"

namespace lrexplain {

RocCurve roc_from_scores(const std::vector<double>& genuine_scores,
                         const std::vector<double>& impostor_scores) {
  if (genuine_scores.empty() || impostor_scores.empty())
    throw DataError("roc_from_scores: both score lists must be nonempty");

  std::vector<double> gen = genuine_scores;
  std::vector<double> imp = impostor_scores;
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());

  std::vector<double> thresholds;
  thresholds.reserve(gen.size() + imp.size());
  thresholds.insert(thresholds.end(), gen.begin(), gen.end());
  thresholds.insert(thresholds.end(), imp.begin(), imp.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  const double ng = static_cast<double>(gen.size());
  const double ni = static_cast<double>(imp.size());

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  for (double t : thresholds) {
    // score >= t predicts match
    const auto g_ge = gen.end() - std::lower_bound(gen.begin(), gen.end(), t);
    const auto i_ge = imp.end() - std::lower_bound(imp.begin(), imp.end(), t);
    curve.points.push_back(
        {static_cast<double>(i_ge) / ni, static_cast<double>(g_ge) / ng, t});
  }
  if (curve.points.back().fmr != 1.0 || curve.points.back().tmr != 1.0)
    curve.points.push_back(
        {1.0, 1.0, -std::numeric_limits<double>::infinity()});

  double auc = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    auc += (b.fmr - a.fmr) * (a.tmr + b.tmr) / 2.0;
  }
  curve.auc = auc;
  return curve;
}

double tmr_at_fmr(const RocCurve& curve, double fmr_target) {
  if (!(fmr_target > 0.0 && fmr_target < 1.0))
    throw UsageError("tmr_at_fmr: fmr_target must be in (0, 1)");
  double best = 0.0;
  for (const auto& p : curve.points)
    if (p.fmr <= fmr_target) best = std::max(best, p.tmr);
  return best;
}

double eer(const RocCurve& curve) {
  // fnr = 1 - tmr crosses fmr somewhere along the curve; interpolate
  // between the bracketing points.
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    const double da = (1.0 - a.tmr) - a.fmr;
    const double db = (1.0 - b.tmr) - b.fmr;
    if (da == 0.0) return a.fmr;
    if ((da > 0.0) != (db > 0.0) || db == 0.0) {
      const double t = da / (da - db);
      const double fmr = a.fmr + t * (b.fmr - a.fmr);
      const double fnr = (1.0 - a.tmr) + t * ((1.0 - b.tmr) - (1.0 - a.tmr));
      return (fmr + fnr) / 2.0;
    }
  }
  return curve.points.back().fmr;
}

std::string ConfusionMatrix3x2::cell_percent(int row, int col) const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", proportions[row][col] * 100.0);
  return buf;
}

ConfusionMatrix3x2 confusion_from_counts(
    const std::array<std::array<long long, 3>, 2>& counts) {
  ConfusionMatrix3x2 m;
  m.raw_counts = counts;
  for (int r = 0; r < 2; ++r) {
    long long total = 0;
    for (int c = 0; c < 3; ++c) {
      if (counts[r][c] < 0)
        throw DataError("confusion: negative count");
      total += counts[r][c];
    }
    if (total == 0) {
      m.empty_row[r] = true;
      continue;
    }
    for (int c = 0; c < 3; ++c)
      m.proportions[r][c] =
          static_cast<double>(counts[r][c]) / static_cast<double>(total);
  }
  return m;
}

ConfusionMatrix3x2 confusion(
    const std::vector<std::pair<PairLabel, Verdict>>& records) {
  std::array<std::array<long long, 3>, 2> counts{};
  for (const auto& [label, verdict] : records) {
    int row;
    switch (label) {
      case PairLabel::Genuine: row = 0; break;
      case PairLabel::Impostor: row = 1; break;
      default:
        throw DataError("confusion: Unknown label not allowed");
    }
    const int col = verdict == Verdict::Match      ? 0
                    : verdict == Verdict::NonMatch ? 1
                                                   : 2;
    ++counts[row][col];
  }
  return confusion_from_counts(counts);
}

namespace {

struct SeparabilityTerms {
  double silhouette_sum = 0.0;
  double intra_pair_sum = 0.0;  // pooled over both classes
  long long intra_pair_count = 0;
  double inter_pair_sum = 0.0;
  long long inter_pair_count = 0;
};

SeparabilityReport assemble_report(const Eigen::MatrixXd& gen,
                                   const Eigen::MatrixXd& imp,
                                   const SeparabilityTerms& terms,
                                   EmbeddingSpace space) {
  const auto n0 = gen.rows();
  const auto n1 = imp.rows();
  const auto n = n0 + n1;

  const Eigen::RowVectorXd mu0 = gen.colwise().mean();
  const Eigen::RowVectorXd mu1 = imp.colwise().mean();
  const Eigen::RowVectorXd mu =
      (mu0 * double(n0) + mu1 * double(n1)) / double(n);

  SeparabilityReport report;
  report.space = space;
  report.silhouette = terms.silhouette_sum / double(n);

  // Davies-Bouldin for two clusters: (S0 + S1) / M01.
  const double s0 =
      (gen.rowwise() - mu0).rowwise().norm().mean();
  const double s1 =
      (imp.rowwise() - mu1).rowwise().norm().mean();
  const double centroid_dist = (mu0 - mu1).norm();
  report.davies_bouldin =
      centroid_dist > 0.0 ? (s0 + s1) / centroid_dist
                          : std::numeric_limits<double>::infinity();

  const double within = (gen.rowwise() - mu0).rowwise().squaredNorm().sum() +
                        (imp.rowwise() - mu1).rowwise().squaredNorm().sum();
  const double between = double(n0) * (mu0 - mu).squaredNorm() +
                         double(n1) * (mu1 - mu).squaredNorm();
  if (within <= 0.0) {
    report.degenerate_within_scatter = true;
    report.calinski_harabasz = std::numeric_limits<double>::infinity();
    report.fisher_ratio = std::numeric_limits<double>::infinity();
  } else {
    report.calinski_harabasz =
        (between / 1.0) / (within / double(n - 2));
    const double tr0 =
        (gen.rowwise() - mu0).rowwise().squaredNorm().sum() / double(n0 - 1);
    const double tr1 =
        (imp.rowwise() - mu1).rowwise().squaredNorm().sum() / double(n1 - 1);
    report.fisher_ratio = (mu0 - mu1).squaredNorm() / (tr0 + tr1);
  }

  report.inter_intra_ratio =
      terms.intra_pair_count > 0 && terms.intra_pair_sum > 0.0
          ? (terms.inter_pair_sum / double(terms.inter_pair_count)) /
                (terms.intra_pair_sum / double(terms.intra_pair_count))
          : std::numeric_limits<double>::infinity();
  return report;
}

void check_separability_input(const Eigen::MatrixXd& gen,
                              const Eigen::MatrixXd& imp) {
  if (gen.rows() < 2 || imp.rows() < 2)
    throw DataError("separability: need at least 2 vectors per class");
  if (gen.cols() != imp.cols())
    throw DataError("separability: dimension mismatch between classes");
}

}  // namespace

SeparabilityReport separability(const Eigen::MatrixXd& gen,
                                const Eigen::MatrixXd& imp,
                                EmbeddingSpace space) {
  check_separability_input(gen, imp);
  const auto n0 = gen.rows();
  const auto n1 = imp.rows();
  const auto n = n0 + n1;

  Eigen::MatrixXd all(n, gen.cols());
  all.topRows(n0) = gen;
  all.bottomRows(n1) = imp;

  SeparabilityTerms terms;
  // Per-point silhouette terms: both inner loops are serial per point, so
  // the blocked outer reduction is deterministic.
  terms.silhouette_sum = deterministic_sum(n, [&](std::int64_t i) {
    const bool in_gen = i < n0;
    const std::int64_t own_lo = in_gen ? 0 : n0;
    const std::int64_t own_hi = in_gen ? n0 : n;
    const std::int64_t other_lo = in_gen ? n0 : 0;
    const std::int64_t other_hi = in_gen ? n : n0;
    double a_sum = 0.0, b_sum = 0.0;
    for (std::int64_t j = own_lo; j < own_hi; ++j)
      if (j != i) a_sum += (all.row(i) - all.row(j)).norm();
    for (std::int64_t j = other_lo; j < other_hi; ++j)
      b_sum += (all.row(i) - all.row(j)).norm();
    const double a = a_sum / double(own_hi - own_lo - 1);
    const double b = b_sum / double(other_hi - other_lo);
    const double denom = std::max(a, b);
    return denom > 0.0 ? (b - a) / denom : 0.0;
  });

  terms.intra_pair_sum = deterministic_sum(n, [&](std::int64_t i) {
    const bool in_gen = i < n0;
    const std::int64_t hi = in_gen ? n0 : n;
    double s = 0.0;
    for (std::int64_t j = i + 1; j < hi; ++j)
      s += (all.row(i) - all.row(j)).norm();
    return s;
  });
  terms.intra_pair_count = n0 * (n0 - 1) / 2 + n1 * (n1 - 1) / 2;

  terms.inter_pair_sum = deterministic_sum(n0, [&](std::int64_t i) {
    double s = 0.0;
    for (std::int64_t j = 0; j < n1; ++j)
      s += (gen.row(i) - imp.row(j)).norm();
    return s;
  });
  terms.inter_pair_count = n0 * n1;

  return assemble_report(gen, imp, terms, space);
}

std::vector<ProjectedPoint> project_2d(const Eigen::MatrixXd& vectors,
                                       const std::vector<PairLabel>& labels) {
  const auto n = vectors.rows();
  if (n < 3) throw DataError("project_2d: need at least 3 vectors");
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw DataError("project_2d: label count does not match vector count");

  const Eigen::RowVectorXd mean = vectors.colwise().mean();
  Eigen::MatrixXd centered = vectors.rowwise() - mean;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const int rank = static_cast<int>(svd.singularValues().size());

  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(vectors.cols(), 2);
  basis.col(0) = svd.matrixV().col(0);
  if (rank > 1 && svd.singularValues()(1) > 0.0)
    basis.col(1) = svd.matrixV().col(1);
  // Fixed sign: largest-magnitude entry of each direction positive.
  for (int c = 0; c < 2; ++c) {
    Eigen::Index arg;
    if (basis.col(c).cwiseAbs().maxCoeff(&arg) > 0.0 && basis(arg, c) < 0.0)
      basis.col(c) *= -1.0;
  }

  Eigen::MatrixXd coords = centered * basis;
  std::vector<ProjectedPoint> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = {coords(i, 0), coords(i, 1),
                                        labels[static_cast<std::size_t>(i)]};
  return out;
}

namespace reference {

double auc_by_pair_counting(const std::vector<double>& genuine_scores,
                            const std::vector<double>& impostor_scores) {
  if (genuine_scores.empty() || impostor_scores.empty())
    throw DataError("auc oracle: both score lists must be nonempty");
  double wins = 0.0;
  for (double g : genuine_scores)
    for (double i : impostor_scores) {
      if (g > i)
        wins += 1.0;
      else if (g == i)
        wins += 0.5;
    }
  return wins / (static_cast<double>(genuine_scores.size()) *
                 static_cast<double>(impostor_scores.size()));
}

SeparabilityReport separability_serial(const Eigen::MatrixXd& gen,
                                       const Eigen::MatrixXd& imp,
                                       EmbeddingSpace space) {
  check_separability_input(gen, imp);
  const auto n0 = gen.rows();
  const auto n1 = imp.rows();
  const auto n = n0 + n1;

  Eigen::MatrixXd all(n, gen.cols());
  all.topRows(n0) = gen;
  all.bottomRows(n1) = imp;

  SeparabilityTerms terms;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool in_gen = i < n0;
    double a_sum = 0.0, b_sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (all.row(i) - all.row(j)).norm();
      if ((j < n0) == in_gen)
        a_sum += d;
      else
        b_sum += d;
    }
    const double a = a_sum / double((in_gen ? n0 : n1) - 1);
    const double b = b_sum / double(in_gen ? n1 : n0);
    const double denom = std::max(a, b);
    terms.silhouette_sum += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (all.row(i) - all.row(j)).norm();
      if ((i < n0) == (j < n0)) {
        terms.intra_pair_sum += d;
        ++terms.intra_pair_count;
      } else {
        terms.inter_pair_sum += d;
        ++terms.inter_pair_count;
      }
    }
  return assemble_report(gen, imp, terms, space);
}

}  // namespace reference

}  // namespace lrexplain
