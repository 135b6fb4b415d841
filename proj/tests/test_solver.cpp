#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "helpers.hpp"
#include "netpred/errors.hpp"
#include "netpred/rng.hpp"
#include "netpred/solver.hpp"

using namespace netpred;

namespace {

double soft(double z, double g) { return z > g ? z - g : (z < -g ? z + g : 0.0); }

// Columns 1..7 of the 8x8 Hadamard matrix: exactly mean-zero, mutually
// orthogonal, unit population variance -- internal standardization is the
// identity and (1/n) X'X = I.
Eigen::MatrixXd hadamard_design() {
  Eigen::MatrixXd h(1, 1);
  h << 1;
  for (int size = 2; size <= 8; size *= 2) {
    Eigen::MatrixXd next(size, size);
    next.topLeftCorner(size / 2, size / 2) = h;
    next.topRightCorner(size / 2, size / 2) = h;
    next.bottomLeftCorner(size / 2, size / 2) = h;
    next.bottomRightCorner(size / 2, size / 2) = -h;
    h = next;
  }
  return h.rightCols(7);
}

// Independent oracle for penalized binary logistic regression: proximal
// gradient (ISTA) on the mean negative log-likelihood, intercept unpenalized.
struct BinaryLogisticFit {
  double intercept;
  Eigen::VectorXd betas;
};

BinaryLogisticFit ista_binary_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y01,
                                       double lambda) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  const Eigen::MatrixXd gram = X.transpose() * X / n;
  // Lipschitz bound for the logistic gradient (curvature <= 1/4), plus the
  // intercept block handled with step 4.
  const double L = 0.25 * (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram)
                               .eigenvalues()
                               .maxCoeff() +
                           1.0);
  const double step = 1.0 / L;
  double b0 = 0.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  for (int it = 0; it < 200000; ++it) {
    const Eigen::VectorXd eta = (X * b).array() + b0;
    const Eigen::VectorXd p = 1.0 / (1.0 + (-eta.array()).exp());
    const Eigen::VectorXd g = p - y01;
    const double g0 = g.mean();
    const Eigen::VectorXd gb = X.transpose() * g / n;
    double max_move = std::abs(step * g0);
    b0 -= step * g0;
    for (int j = 0; j < d; ++j) {
      const double next = soft(b[j] - step * gb[j], step * lambda);
      max_move = std::max(max_move, std::abs(next - b[j]));
      b[j] = next;
    }
    if (max_move < 1e-11) break;
  }
  return {b0, b};
}

}  // namespace

TEST_CASE("orthonormal design reproduces the closed-form soft-threshold solution") {
  const Eigen::MatrixXd X = hadamard_design();
  Rng rng(41);
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) y[i] = rng.normal();
  const double lambda = 0.05;

  SolveInfo info;
  const CoefficientSet fit = fit_gaussian_lasso(X, y, lambda, {}, &info);
  const Eigen::VectorXd yc = y.array() - y.mean();
  for (int j = 0; j < 7; ++j) {
    const double oracle = soft(X.col(j).dot(yc) / 8.0, lambda);
    CHECK(fit.betas(j, 0) == doctest::Approx(oracle).epsilon(0).scale(1e-8));
  }
  CHECK(info.converged);

  const LassoProblem problem{X, y, Family::gaussian, 1, lambda};
  CHECK(kkt_violation(problem, fit) < 1e-10);
}

TEST_CASE("a penalty at or above lambda_max forces every beta to exactly zero") {
  Rng rng(5);
  Eigen::MatrixXd X = testutil::standardize(testutil::random_matrix(60, 4, 77));
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i) y[i] = rng.normal();

  GaussianCoordinateDescent solver(X, y);
  const double lmax = solver.lambda_max();
  for (const double lambda : {lmax, lmax * 1.5}) {
    const CoefficientSet fit = fit_gaussian_lasso(X, y, lambda);
    CHECK(fit.betas.cwiseAbs().maxCoeff() == 0.0);
    CHECK(fit.intercepts[0] == doctest::Approx(y.mean()).epsilon(1e-14));
  }
}

TEST_CASE("lambda = 0 full-rank fit matches the normal-equations oracle") {
  const Eigen::MatrixXd X = testutil::random_matrix(200, 5, 99);
  Rng rng(100);
  Eigen::VectorXd beta_true(5);
  beta_true << 1.0, -0.5, 0.25, 0.0, 2.0;
  Eigen::VectorXd y = X * beta_true;
  for (int i = 0; i < 200; ++i) y[i] += 0.3 * rng.normal() + 0.7;

  Eigen::MatrixXd design(200, 6);
  design.col(0).setOnes();
  design.rightCols(5) = X;
  const Eigen::VectorXd ols = (design.transpose() * design).ldlt().solve(design.transpose() * y);

  SolveOptions opts;
  opts.tol = 1e-12;
  opts.kkt_target = 1e-11;
  const CoefficientSet fit = fit_gaussian_lasso(X, y, 0.0, opts);
  CHECK(fit.intercepts[0] == doctest::Approx(ols[0]).epsilon(0).scale(1e-8));
  for (int j = 0; j < 5; ++j)
    CHECK(fit.betas(j, 0) == doctest::Approx(ols[j + 1]).epsilon(0).scale(1e-8));

  // residual sigma agrees with the direct residual computation
  const Eigen::VectorXd resid = y - design * ols;
  const double sd = std::sqrt((resid.array() - resid.mean()).square().sum() / 199.0);
  CHECK(*fit.residual_sigma == doctest::Approx(sd).epsilon(1e-6));
}

TEST_CASE("constant response short-circuits to the intercept-only model") {
  const Eigen::MatrixXd X = testutil::random_matrix(30, 3, 1);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(30, 4.25);
  const CoefficientSet fit = fit_gaussian_lasso(X, y, 0.1);
  CHECK(fit.betas.cwiseAbs().maxCoeff() == 0.0);
  CHECK(fit.intercepts[0] == 4.25);
  CHECK(*fit.residual_sigma == 0.0);
}

TEST_CASE("constant design columns come back with coefficient zero") {
  Eigen::MatrixXd X = testutil::random_matrix(50, 3, 2);
  X.col(1).setConstant(7.0);
  Rng rng(3);
  Eigen::VectorXd y = X.col(0) * 0.8;
  for (int i = 0; i < 50; ++i) y[i] += 0.1 * rng.normal();
  const CoefficientSet fit = fit_gaussian_lasso(X, y, 0.01);
  CHECK(fit.betas(1, 0) == 0.0);
  CHECK(fit.betas(0, 0) > 0.5);
}

TEST_CASE("every converged fit satisfies the contract-level KKT bound") {
  Rng rng(55);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 40 + static_cast<int>(rng.below(100));
    const int d = 2 + static_cast<int>(rng.below(6));
    const Eigen::MatrixXd X = testutil::random_matrix(n, d, 1000 + trial);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.normal();
    y += X.col(0) * 0.5;
    const double lambda = 0.002 + 0.1 * rng.uniform();
    const CoefficientSet fit = fit_gaussian_lasso(X, y, lambda);
    const LassoProblem problem{X, y, Family::gaussian, 1, lambda};
    CHECK(kkt_violation(problem, fit) < 1e-6);
  }
}

TEST_CASE("kkt_violation grows when a converged coefficient is perturbed") {
  const Eigen::MatrixXd X = testutil::random_matrix(80, 4, 7);
  Rng rng(8);
  Eigen::VectorXd y = X.col(0) - 0.5 * X.col(2);
  for (int i = 0; i < 80; ++i) y[i] += 0.5 * rng.normal();
  const double lambda = 0.02;
  const CoefficientSet fit = fit_gaussian_lasso(X, y, lambda);
  const LassoProblem problem{X, y, Family::gaussian, 1, lambda};
  const double base = kkt_violation(problem, fit);

  CoefficientSet perturbed = fit;
  perturbed.betas(0, 0) += 0.1;
  CHECK(kkt_violation(problem, perturbed) > base);
  CHECK(kkt_violation(problem, perturbed) > 0.05);
}

TEST_CASE("kkt_violation rejects dimension mismatches") {
  const Eigen::MatrixXd X = testutil::random_matrix(20, 3, 4);
  const Eigen::VectorXd y = X.col(0);
  CoefficientSet bad;
  bad.intercepts = Eigen::VectorXd::Zero(1);
  bad.betas = Eigen::MatrixXd::Zero(2, 1);
  CHECK_THROWS_AS(kkt_violation({X, y, Family::gaussian, 1, 0.1}, bad), DataError);
}

TEST_CASE("warm-started path solutions move continuously in lambda") {
  const Eigen::MatrixXd X = testutil::standardize(testutil::random_matrix(150, 6, 21));
  Rng rng(22);
  Eigen::VectorXd y = X.col(0) * 1.2 - X.col(3) * 0.7;
  for (int i = 0; i < 150; ++i) y[i] += rng.normal();
  y = (y.array() - y.mean()) / std::sqrt(y.squaredNorm() / y.size());

  GaussianCoordinateDescent solver(X, y);
  double lambda = solver.lambda_max();
  CoefficientSet prev = solver.solve(lambda);
  for (int step = 0; step < 40; ++step) {
    lambda *= 0.99;
    const CoefficientSet next = solver.solve(lambda);
    CHECK((next.betas - prev.betas).cwiseAbs().maxCoeff() < 0.1);
    prev = next;
  }
}

TEST_CASE("gaussian path respects active-set monotonicity under warm starts") {
  const Eigen::MatrixXd X = testutil::random_matrix(300, 6, 31);
  Rng rng(32);
  Eigen::VectorXd y = 0.9 * X.col(0) - 0.6 * X.col(2) + 0.3 * X.col(4);
  for (int i = 0; i < 300; ++i) y[i] += rng.normal();

  GaussianCoordinateDescent solver(X, y);
  double lambda = solver.lambda_max();
  std::vector<std::vector<int>> active_sets;
  for (int step = 0; step < 25; ++step) {
    const CoefficientSet fit = solver.solve(lambda);
    std::vector<int> active;
    for (int j = 0; j < 6; ++j)
      if (fit.betas(j, 0) != 0.0) active.push_back(j);
    active_sets.push_back(active);
    lambda *= 0.75;
  }
  for (std::size_t s = 1; s < active_sets.size(); ++s)
    for (const int j : active_sets[s - 1])
      CHECK(std::find(active_sets[s].begin(), active_sets[s].end(), j) !=
            active_sets[s].end());
}

// --- multinomial -----------------------------------------------------------

TEST_CASE("a dominating penalty leaves the marginal model") {
  Rng rng(61);
  const int n = 120;
  const Eigen::MatrixXd X = testutil::random_matrix(n, 3, 62);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = 1 + static_cast<double>(rng.below(3));

  const CoefficientSet fit = fit_multinomial_lasso(X, y, 3, 1e3);
  CHECK(fit.betas.cwiseAbs().maxCoeff() == 0.0);

  // intercepts reproduce marginal log-proportions up to an additive constant
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < n; ++i) counts[static_cast<int>(y[i]) - 1] += 1.0;
  const Eigen::VectorXd log_marg = (counts / n).array().log();
  const double shift = fit.intercepts[0] - log_marg[0];
  for (int k = 1; k < 3; ++k)
    CHECK(fit.intercepts[k] - log_marg[k] == doctest::Approx(shift).epsilon(0).scale(1e-6));

  // predicted probabilities equal the marginals for any row
  const Eigen::MatrixXd P = multinomial_probabilities(X, fit);
  for (int k = 0; k < 3; ++k)
    CHECK(P(0, k) == doctest::Approx(counts[k] / n).epsilon(0).scale(1e-6));
}

TEST_CASE("binary multinomial agrees with an independent logistic oracle") {
  const int n = 300;
  const Eigen::MatrixXd X = testutil::standardize(testutil::random_matrix(n, 4, 71));
  Rng rng(72);
  Eigen::VectorXd y(n), y01(n);
  for (int i = 0; i < n; ++i) {
    const double eta = 1.2 * X(i, 0) - 0.8 * X(i, 2);
    const double p1 = 1.0 / (1.0 + std::exp(-eta));
    const bool is1 = rng.uniform() < p1;
    y[i] = is1 ? 1.0 : 2.0;
    y01[i] = is1 ? 1.0 : 0.0;
  }
  const double lambda = 0.02;

  SolveOptions opts;
  opts.tol = 1e-9;
  opts.kkt_target = 1e-9;
  const CoefficientSet fit = fit_multinomial_lasso(X, y, 2, lambda, opts);
  const BinaryLogisticFit oracle = ista_binary_logistic(X, y01, lambda);

  // the class-1-vs-2 contrast is the logistic coefficient vector
  for (int j = 0; j < 4; ++j)
    CHECK(fit.betas(j, 0) - fit.betas(j, 1) ==
          doctest::Approx(oracle.betas[j]).epsilon(0).scale(1e-4));
  const Eigen::MatrixXd P = multinomial_probabilities(X, fit);
  for (int i = 0; i < n; i += 17) {
    const double eta = oracle.intercept + X.row(i).dot(oracle.betas);
    const double p1 = 1.0 / (1.0 + std::exp(-eta));
    CHECK(P(i, 0) == doctest::Approx(p1).epsilon(0).scale(1e-4));
  }

  const LassoProblem problem{X, y, Family::multinomial, 2, lambda};
  CHECK(kkt_violation(problem, fit) < 1e-6);
}

TEST_CASE("sign pattern of strong generating coefficients is recovered at n=60") {
  const int n = 60, K = 3;
  const Eigen::MatrixXd X = testutil::standardize(testutil::random_matrix(n, 2, 81));
  Eigen::MatrixXd beta_true(2, K);
  beta_true << 1.5, 0.0, -1.5,  // predictor 1 pushes category 1 up, 3 down
      -1.5, 0.0, 1.5;           // predictor 2 the reverse
  Rng rng(82);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd mu = beta_true.transpose() * X.row(i).transpose();
    Eigen::VectorXd e = (mu.array() - mu.maxCoeff()).exp();
    const Eigen::VectorXd prob = e / e.sum();
    const double u = rng.uniform();
    double acc = 0.0;
    y[i] = K;
    for (int k = 0; k < K; ++k) {
      acc += prob[k];
      if (u < acc) {
        y[i] = k + 1;
        break;
      }
    }
  }
  const CoefficientSet fit = fit_multinomial_lasso(X, y, K, 0.02);
  // gauge-invariant contrasts between the strong categories
  CHECK(fit.betas(0, 0) - fit.betas(0, 2) > 0.5);
  CHECK(fit.betas(1, 0) - fit.betas(1, 2) < -0.5);
}

TEST_CASE("multinomial requires every category present") {
  const Eigen::MatrixXd X = testutil::random_matrix(30, 2, 91);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(30);
  y[3] = 2.0;
  CHECK_THROWS_AS(fit_multinomial_lasso(X, y, 3, 0.1), DataError);
}

TEST_CASE("unpenalized fit on separable data is flagged, regularized fit converges") {
  const int n = 40;
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = i < n / 2 ? -1.0 - 0.01 * i : 1.0 + 0.01 * i;
    y[i] = i < n / 2 ? 1.0 : 2.0;
  }
  SolveOptions opts;
  opts.max_sweeps = 3000;
  SolveInfo info;
  const CoefficientSet fit = fit_multinomial_lasso(X, y, 2, 0.0, opts, &info);
  CHECK(info.separation_suspect);
  CHECK(fit.betas.allFinite());

  SolveInfo reg_info;
  fit_multinomial_lasso(X, y, 2, 0.05, {}, &reg_info);
  CHECK(reg_info.converged);
  CHECK_FALSE(reg_info.separation_suspect);
}

TEST_CASE("adding a constant to all intercepts leaves probabilities unchanged") {
  const Eigen::MatrixXd X = testutil::random_matrix(25, 3, 95);
  Rng rng(96);
  Eigen::VectorXd y(25);
  for (int i = 0; i < 25; ++i) y[i] = 1 + static_cast<double>(rng.below(3));
  CoefficientSet fit = fit_multinomial_lasso(X, y, 3, 0.05);
  const Eigen::MatrixXd P = multinomial_probabilities(X, fit);
  fit.intercepts.array() += 100.0;
  const Eigen::MatrixXd P_shifted = multinomial_probabilities(X, fit);
  CHECK((P - P_shifted).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("solver input validation") {
  const Eigen::MatrixXd X = testutil::random_matrix(10, 2, 97);
  const Eigen::VectorXd y = X.col(0);
  CHECK_THROWS_AS(fit_gaussian_lasso(X, y, -0.1), DataError);
  CHECK_THROWS_AS(fit_gaussian_lasso(X, y.head(5), 0.1), DataError);
  Eigen::VectorXd bad = y;
  bad[0] = std::nan("");
  CHECK_THROWS_AS(fit_gaussian_lasso(X, bad, 0.1), DataError);
}
