#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "netpred/cv.hpp"
#include "netpred/errors.hpp"
#include "netpred/rng.hpp"

using namespace netpred;

TEST_CASE("gaussian lambda_max equals the KKT-at-zero oracle") {
  const int n = 120;
  const Eigen::MatrixXd X = testutil::random_matrix(n, 5, 11);
  Rng rng(12);
  Eigen::VectorXd y = X.col(1) * 0.5;
  for (int i = 0; i < n; ++i) y[i] += rng.normal();

  CvConfig config;
  const std::vector<double> path = lambda_path(X, y, Family::gaussian, 1, config);

  // oracle: max_j |x_j' y_c| / n on the standardized design, computed directly
  const Eigen::MatrixXd Xs = testutil::standardize(X);
  const Eigen::VectorXd yc = y.array() - y.mean();
  double oracle = 0.0;
  for (int j = 0; j < Xs.cols(); ++j) oracle = std::max(oracle, std::abs(Xs.col(j).dot(yc)) / n);
  CHECK(path[0] == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("lambda path is strictly decreasing with the configured length and floor") {
  const Eigen::MatrixXd X = testutil::random_matrix(60, 3, 13);
  const Eigen::VectorXd y = X.col(0) + X.col(1);
  CvConfig config;
  config.n_lambda = 37;
  config.lambda_min_ratio = 1e-2;
  const auto path = lambda_path(X, y, Family::gaussian, 1, config);
  REQUIRE(path.size() == 37);
  for (std::size_t i = 1; i < path.size(); ++i) CHECK(path[i] < path[i - 1]);
  CHECK(path.back() == doctest::Approx(path[0] * 1e-2).epsilon(1e-9));
}

TEST_CASE("solving at path[0] yields the all-zero model for both families") {
  const Eigen::MatrixXd X = testutil::random_matrix(90, 4, 17);
  Rng rng(18);

  Eigen::VectorXd y(90);
  for (int i = 0; i < 90; ++i) y[i] = rng.normal() + 0.2 * X(i, 0);
  CvConfig config;
  const auto gpath = lambda_path(X, y, Family::gaussian, 1, config);
  const CoefficientSet gfit = fit_gaussian_lasso(X, y, gpath[0]);
  CHECK(gfit.betas.cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd yc(90);
  for (int i = 0; i < 90; ++i)
    yc[i] = 1 + static_cast<double>(rng.below(3));
  const auto mpath = lambda_path(X, yc, Family::multinomial, 3, config);
  const CoefficientSet mfit = fit_multinomial_lasso(X, yc, 3, mpath[0]);
  CHECK(mfit.betas.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lambda_path rejects a zero-variance response") {
  const Eigen::MatrixXd X = testutil::random_matrix(30, 2, 19);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(30, 3.0);
  CHECK_THROWS_AS(lambda_path(X, y, Family::gaussian, 1, CvConfig{}), DataError);
}

TEST_CASE("fold assignment partitions rows with sizes differing by at most one") {
  Rng rng(23);
  Eigen::VectorXd y(47);
  for (int i = 0; i < 47; ++i) y[i] = rng.normal();
  const auto folds = assign_folds(y, Family::gaussian, 1, 10, 7);
  REQUIRE(folds.size() == 47);
  std::vector<int> counts(10, 0);
  for (const int f : folds) {
    REQUIRE(f >= 0);
    REQUIRE(f < 10);
    ++counts[static_cast<std::size_t>(f)];
  }
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  CHECK(*hi - *lo <= 1);
  CHECK(assign_folds(y, Family::gaussian, 1, 10, 7) == folds);  // deterministic
}

TEST_CASE("stratified folds keep class proportions balanced") {
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i) y[i] = i < 12 ? 1.0 : 2.0;  // 12 vs 48
  const auto folds = assign_folds(y, Family::multinomial, 2, 6, 3);
  std::vector<int> minority(6, 0), total(6, 0);
  for (int i = 0; i < 60; ++i) {
    ++total[static_cast<std::size_t>(folds[static_cast<std::size_t>(i)])];
    if (y[i] == 1.0) ++minority[static_cast<std::size_t>(folds[static_cast<std::size_t>(i)])];
  }
  for (int f = 0; f < 6; ++f) {
    CHECK(minority[static_cast<std::size_t>(f)] == 2);  // 12 / 6 exactly
    CHECK(total[static_cast<std::size_t>(f)] == 10);
  }
}

TEST_CASE("a category too rare for every training fold raises an error") {
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) y[i] = 1.0;
  y[4] = 2.0;  // a single member can't appear in every training complement
  CHECK_THROWS_AS(assign_folds(y, Family::multinomial, 2, 5, 11), DataError);
}

TEST_CASE("select_lambda is deterministic given data, config and seed") {
  const Eigen::MatrixXd X = testutil::random_matrix(80, 4, 29);
  Rng rng(30);
  Eigen::VectorXd y = X.col(0);
  for (int i = 0; i < 80; ++i) y[i] += 0.5 * rng.normal();
  CvConfig config;
  config.folds = 5;
  config.n_lambda = 20;
  config.seed = 99;
  const CvResult a = select_lambda(X, y, Family::gaussian, 1, config);
  const CvResult b = select_lambda(X, y, Family::gaussian, 1, config);
  CHECK(a.best_lambda == b.best_lambda);
  CHECK(a.mean_loss == b.mean_loss);
}

TEST_CASE("reported CV losses match a cold-start recomputation") {
  const Eigen::MatrixXd X = testutil::random_matrix(50, 3, 31);
  Rng rng(32);
  Eigen::VectorXd y = 0.8 * X.col(1);
  for (int i = 0; i < 50; ++i) y[i] += rng.normal();
  CvConfig config;
  config.folds = 5;
  config.n_lambda = 12;
  config.seed = 3;
  const CvResult warm = select_lambda(X, y, Family::gaussian, 1, config);

  const auto folds = assign_folds(y, Family::gaussian, 1, config.folds, config.seed);
  std::vector<double> cold(warm.lambdas.size(), 0.0);
  for (int f = 0; f < config.folds; ++f) {
    std::vector<int> train, test;
    for (int i = 0; i < 50; ++i)
      (folds[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    Eigen::MatrixXd Xtr(train.size(), 3), Xte(test.size(), 3);
    Eigen::VectorXd ytr(train.size()), yte(test.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      Xtr.row(static_cast<Eigen::Index>(i)) = X.row(train[i]);
      ytr[static_cast<Eigen::Index>(i)] = y[train[i]];
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
      Xte.row(static_cast<Eigen::Index>(i)) = X.row(test[i]);
      yte[static_cast<Eigen::Index>(i)] = y[test[i]];
    }
    for (std::size_t l = 0; l < warm.lambdas.size(); ++l) {
      // fresh solver per lambda: no warm start at all
      const CoefficientSet fit = fit_gaussian_lasso(Xtr, ytr, warm.lambdas[l]);
      const Eigen::VectorXd pred = (Xte * fit.betas.col(0)).array() + fit.intercepts[0];
      cold[l] += (pred - yte).squaredNorm();
    }
  }
  for (std::size_t l = 0; l < cold.size(); ++l)
    CHECK(warm.mean_loss[l] == doctest::Approx(cold[l] / 50.0).epsilon(0).scale(1e-6));
}

TEST_CASE("pure noise selects within the sparsest quartile of the path") {
  std::vector<double> picks;
  for (int seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd X = testutil::random_matrix(60, 4, 4000 + seed);
    Rng rng(5000 + seed);
    Eigen::VectorXd y(60);
    for (int i = 0; i < 60; ++i) y[i] = rng.normal();
    CvConfig config;
    config.folds = 5;
    config.n_lambda = 40;
    config.seed = static_cast<std::uint64_t>(seed);
    const CvResult r = select_lambda(X, y, Family::gaussian, 1, config);
    picks.push_back(static_cast<double>(r.best_index));
  }
  CHECK(testutil::median(picks) <= 10.0);  // top quartile of 40
}

TEST_CASE("a strong single predictor is always selected") {
  Rng rng(61);
  const Eigen::MatrixXd X = testutil::random_matrix(500, 5, 60);
  Eigen::VectorXd y = X.col(2);
  for (int i = 0; i < 500; ++i) y[i] += 0.1 * rng.normal();
  CvConfig config;
  config.seed = 1;
  const CvResult r = select_lambda(X, y, Family::gaussian, 1, config);
  const CoefficientSet fit = fit_gaussian_lasso(X, y, r.best_lambda);
  CHECK(fit.betas(2, 0) != 0.0);
  CHECK(fit.betas(2, 0) > 0.8);
}

TEST_CASE("cross-validation config validation") {
  const Eigen::MatrixXd X = testutil::random_matrix(20, 2, 63);
  const Eigen::VectorXd y = X.col(0);
  CvConfig config;
  config.folds = 1;
  CHECK_THROWS_AS(select_lambda(X, y, Family::gaussian, 1, config), DataError);
  config.folds = 25;  // more folds than rows
  CHECK_THROWS_AS(select_lambda(X, y, Family::gaussian, 1, config), DataError);
  config.folds = 5;
  config.lambda_min_ratio = 1.5;
  CHECK_THROWS_AS(select_lambda(X, y, Family::gaussian, 1, config), DataError);
}
