#include "netpred/sampler.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "netpred/errors.hpp"
#include "netpred/rng.hpp"

namespace netpred {

namespace {

std::vector<VariableSpec> continuous_spec(int p) {
  std::vector<VariableSpec> spec(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j)
    spec[static_cast<std::size_t>(j)] = {"x" + std::to_string(j + 1), VarKind::continuous, 1};
  return spec;
}

}  // namespace

Dataset sample_ggm(const Eigen::MatrixXd& precision, int n, std::uint64_t seed) {
  const int p = static_cast<int>(precision.rows());
  if (precision.cols() != p) throw DataError("precision matrix must be square");
  if (!precision.isApprox(precision.transpose(), 1e-10))
    throw DataError("precision matrix must be symmetric");
  if (n < 1) throw DataError("sample count must be positive");

  // precision = M M'; x = M^{-T} z has covariance precision^{-1}.
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw DataError("precision matrix is not positive definite");
  const Eigen::MatrixXd M_t = llt.matrixU();

  Rng rng(seed);
  Eigen::MatrixXd values(n, p);
  Eigen::VectorXd z(p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z[j] = rng.normal();
    values.row(i) = M_t.triangularView<Eigen::Upper>().solve(z).transpose();
  }
  return Dataset(continuous_spec(p), std::move(values));
}

Dataset sample_ising_gibbs(const Eigen::MatrixXd& weights, const Eigen::VectorXd& thresholds,
                           int n, int burn_in, int thin, std::uint64_t seed) {
  const int p = static_cast<int>(weights.rows());
  if (weights.cols() != p) throw DataError("weight matrix must be square");
  if (thresholds.size() != p) throw DataError("threshold length must match weight matrix");
  if (!weights.isApprox(weights.transpose(), 1e-10))
    throw DataError("weight matrix must be symmetric");
  if (weights.diagonal().cwiseAbs().maxCoeff() != 0.0)
    throw DataError("weight matrix must have a zero diagonal");
  if (n < 1) throw DataError("sample count must be positive");
  if (thin < 1) throw DataError("thinning interval must be positive");

  Rng rng(seed);
  Eigen::VectorXd spins(p);
  for (int j = 0; j < p; ++j) spins[j] = rng.uniform() < 0.5 ? -1.0 : 1.0;

  auto sweep = [&]() {
    for (int j = 0; j < p; ++j) {
      const double field = thresholds[j] + weights.row(j).dot(spins);
      // P(s_j = +1 | rest) = sigmoid(2 * field); diagonal is zero by contract
      const double prob_up = 1.0 / (1.0 + std::exp(-2.0 * field));
      spins[j] = rng.uniform() < prob_up ? 1.0 : -1.0;
    }
  };

  for (int b = 0; b < burn_in; ++b) sweep();

  Eigen::MatrixXd values(n, p);
  std::vector<VariableSpec> spec(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j)
    spec[static_cast<std::size_t>(j)] = {"x" + std::to_string(j + 1), VarKind::categorical, 2};
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < thin; ++t) sweep();
    for (int j = 0; j < p; ++j) values(i, j) = spins[j] < 0 ? 1.0 : 2.0;
  }
  return Dataset(std::move(spec), std::move(values));
}

Dataset simulate_var(const Eigen::MatrixXd& coefficients, const Eigen::VectorXd& noise_sds,
                     int n, std::uint64_t seed) {
  const int p = static_cast<int>(coefficients.rows());
  if (coefficients.cols() != p) throw DataError("coefficient matrix must be square");
  if (noise_sds.size() != p) throw DataError("noise sd length must match coefficient matrix");
  if (noise_sds.minCoeff() < 0) throw DataError("noise sds must be non-negative");
  if (n < 1) throw DataError("sample count must be positive");
  const double radius = spectral_radius(coefficients);
  if (!(radius < 1.0))
    throw DataError("coefficient matrix is unstable (spectral radius " +
                    std::to_string(radius) + ")");

  constexpr int kBurnIn = 500;
  Rng rng(seed);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd values(n, p);
  for (int t = 0; t < kBurnIn + n; ++t) {
    Eigen::VectorXd eps(p);
    for (int j = 0; j < p; ++j) eps[j] = noise_sds[j] * rng.normal();
    x = coefficients * x + eps;
    if (t >= kBurnIn) values.row(t - kBurnIn) = x.transpose();
  }
  return Dataset(continuous_spec(p), std::move(values));
}

Eigen::VectorXd population_r2(const Eigen::MatrixXd& precision) {
  const int p = static_cast<int>(precision.rows());
  if (precision.cols() != p) throw DataError("precision matrix must be square");
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw DataError("precision matrix is not positive definite");
  const Eigen::MatrixXd covariance = llt.solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::VectorXd r2(p);
  for (int j = 0; j < p; ++j)
    r2[j] = 1.0 - (1.0 / precision(j, j)) / covariance(j, j);
  return r2;
}

double spectral_radius(const Eigen::MatrixXd& m) {
  const Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace netpred
