#include <doctest.h>

#include <random>

#include "lrexplain/pca.hpp"

using namespace lrexplain;

namespace {

Eigen::MatrixXd four_point_example() {
  Eigen::MatrixXd rows(4, 2);
  rows << 1, 0, -1, 0, 0, 0.1, 0, -0.1;
  return rows;
}

Eigen::MatrixXd random_rows(int n, int d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd rows(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      rows(i, j) = gauss(rng) * (1.0 + j);  // anisotropic
  return rows;
}

}  // namespace

TEST_CASE("hand-computable 4-point example retains one component") {
  const auto model = fit_pca(four_point_example(), 0.97);
  CHECK(model.k == 1);
  // variances 0.5 and 0.005 along the two axes
  CHECK(model.explained_variance_ratio[0] ==
        doctest::Approx(0.5 / 0.505).epsilon(1e-9));
  CHECK(model.explained_variance_ratio[0] ==
        doctest::Approx(0.990099).epsilon(1e-5));
  // first component is the x axis, sign fixed positive
  CHECK(std::abs(model.components(0, 0)) == doctest::Approx(1.0));
  CHECK(model.components(0, 0) > 0.0);
}

TEST_CASE("rank-1 data in 3-D retains one component with ratio 1") {
  Eigen::MatrixXd rows(5, 3);
  for (int i = 0; i < 5; ++i) {
    const double t = i - 2.0;
    rows.row(i) << t, 2 * t, -t;
  }
  const auto model = fit_pca(rows, 0.97);
  CHECK(model.k == 1);
  CHECK(model.explained_variance_ratio[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("transform centers and respects orthonormality") {
  const auto rows = random_rows(200, 6, 7);
  const auto model = fit_pca(rows, 0.97);

  const Eigen::VectorXd at_mean = model.transform(model.mean);
  CHECK(at_mean.norm() == doctest::Approx(0.0).epsilon(1e-12));

  const Eigen::VectorXd x =
      model.mean + model.components.row(0).transpose();
  const Eigen::VectorXd z = model.transform(x);
  CHECK(z[0] == doctest::Approx(1.0).epsilon(1e-10));
  for (int j = 1; j < model.k; ++j)
    CHECK(z[j] == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("component rows are pairwise orthonormal") {
  const auto model = fit_pca(random_rows(300, 8, 11), 0.99);
  const Eigen::MatrixXd gram =
      model.components * model.components.transpose();
  CHECK((gram - Eigen::MatrixXd::Identity(model.k, model.k)).norm() <
        1e-8);
}

TEST_CASE("transformed training data has diagonal covariance equal to the "
          "retained eigenvalues") {
  const auto rows = random_rows(500, 10, 3);
  const auto model = fit_pca(rows, 0.999);
  const Eigen::MatrixXd z = model.transform_rows(rows);
  const Eigen::MatrixXd centered = z.rowwise() - z.colwise().mean();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / double(z.rows() - 1);
  const double scale = cov.diagonal().maxCoeff();
  for (int a = 0; a < model.k; ++a) {
    CHECK(cov(a, a) ==
          doctest::Approx(model.explained_variance[a]).epsilon(1e-8));
    for (int b = 0; b < model.k; ++b)
      if (a != b) CHECK(std::abs(cov(a, b)) < 1e-8 * scale);
  }
}

TEST_CASE("raising the variance target never decreases k") {
  const auto rows = random_rows(200, 8, 5);
  int prev_k = 0;
  for (double target : {0.5, 0.7, 0.9, 0.97, 0.999, 1.0}) {
    const auto model = fit_pca(rows, target);
    CHECK(model.k >= prev_k);
    CHECK(model.explained_variance_ratio.sum() >= target - 1e-12);
    prev_k = model.k;
  }
}

TEST_CASE("permuting input rows changes nothing") {
  auto rows = random_rows(100, 5, 9);
  const auto model_a = fit_pca(rows, 0.97);
  // reverse row order
  const Eigen::MatrixXd reversed = rows.colwise().reverse();
  const auto model_b = fit_pca(reversed, 0.97);
  CHECK(model_a.k == model_b.k);
  CHECK((model_a.components - model_b.components).cwiseAbs().maxCoeff() <
        1e-9);
  CHECK((model_a.mean - model_b.mean).norm() < 1e-12);
}

TEST_CASE("degenerate and invalid inputs are errors") {
  Eigen::MatrixXd one_row(1, 3);
  one_row << 1, 2, 3;
  CHECK_THROWS_AS(fit_pca(one_row, 0.97), DataError);

  Eigen::MatrixXd constant = Eigen::MatrixXd::Ones(5, 3);
  CHECK_THROWS_AS(fit_pca(constant, 0.97), DataError);

  std::vector<std::vector<double>> ragged{{1, 2}, {1, 2, 3}};
  CHECK_THROWS_AS(fit_pca(ragged, 0.97), DataError);

  const auto model = fit_pca(four_point_example(), 0.97);
  Eigen::VectorXd wrong_dim(3);
  wrong_dim << 1, 2, 3;
  CHECK_THROWS_AS(model.transform(wrong_dim), DataError);
}
