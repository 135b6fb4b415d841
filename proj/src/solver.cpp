#include "netpred/solver.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "netpred/errors.hpp"

namespace netpred {

namespace {

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

void check_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
  if (X.rows() != y.size()) throw DataError("design and response row counts differ");
  if (X.rows() < 2) throw DataError("need at least 2 rows to fit");
  if (!X.allFinite() || !y.allFinite()) throw DataError("non-finite entries in problem");
  if (lambda < 0) throw DataError("lambda must be non-negative");
}

Eigen::VectorXd row_softmax(const Eigen::VectorXd& mu) {
  const double shift = mu.maxCoeff();
  Eigen::VectorXd e = (mu.array() - shift).exp();
  return e / e.sum();
}

}  // namespace

namespace detail {

Standardization standardize_columns(const Eigen::MatrixXd& X) {
  Standardization s;
  const int d = static_cast<int>(X.cols());
  const int n = static_cast<int>(X.rows());
  s.mean.resize(d);
  s.sd.resize(d);
  for (int j = 0; j < d; ++j) {
    s.mean[j] = X.col(j).mean();
    const double var = (X.col(j).array() - s.mean[j]).square().sum() / n;
    const double sd = std::sqrt(var);
    if (sd > 1e-10 * (1.0 + std::abs(s.mean[j]))) {
      s.sd[j] = sd;
      s.active.push_back(j);
    } else {
      s.sd[j] = 0.0;  // constant column, excluded from the solve
    }
  }
  return s;
}

Eigen::MatrixXd standardized_design(const Eigen::MatrixXd& X, const Standardization& s) {
  Eigen::MatrixXd Xs(X.rows(), static_cast<Eigen::Index>(s.active.size()));
  for (std::size_t a = 0; a < s.active.size(); ++a) {
    const int j = s.active[a];
    Xs.col(static_cast<Eigen::Index>(a)) = (X.col(j).array() - s.mean[j]) / s.sd[j];
  }
  return Xs;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Gaussian lasso, cyclic coordinate descent on the precomputed Gram matrix.

GaussianCoordinateDescent::GaussianCoordinateDescent(const Eigen::MatrixXd& X,
                                                     const Eigen::VectorXd& y)
    : X_(&X), y_(y) {
  check_inputs(X, y, 0.0);
  if (y.maxCoeff() == y.minCoeff()) {
    degenerate_y_ = true;
    y_mean_ = y[0];
    return;
  }
  std_ = detail::standardize_columns(X);
  Xs_ = detail::standardized_design(X, std_);
  const int n = static_cast<int>(X.rows());
  y_mean_ = y.mean();
  Eigen::VectorXd yc = y.array() - y_mean_;
  gram_ = Xs_.transpose() * Xs_ / n;
  xty_ = Xs_.transpose() * yc / n;
  yc_sq_mean_ = yc.squaredNorm() / n;
  beta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(std_.active.size()));
}

void GaussianCoordinateDescent::reset() { beta_.setZero(); }

double GaussianCoordinateDescent::lambda_max() const {
  if (degenerate_y_) throw DataError("zero-variance response has no lambda path");
  return xty_.size() == 0 ? 0.0 : xty_.cwiseAbs().maxCoeff();
}

CoefficientSet GaussianCoordinateDescent::solve(double lambda, const SolveOptions& opts,
                                                SolveInfo* info) {
  if (lambda < 0) throw DataError("lambda must be non-negative");
  const int n = static_cast<int>(X_->rows());
  const int d = static_cast<int>(X_->cols());

  CoefficientSet out;
  out.intercepts = Eigen::VectorXd::Zero(1);
  out.betas = Eigen::MatrixXd::Zero(d, 1);

  if (degenerate_y_) {
    out.intercepts[0] = y_mean_;
    out.residual_sigma = 0.0;
    if (info) *info = SolveInfo{0, 0.0, true, false};
    return out;
  }

  const int da = static_cast<int>(std_.active.size());
  if (opts.warm_start != nullptr) {
    const auto& ws = *opts.warm_start;
    if (ws.betas.rows() != d || ws.betas.cols() != 1)
      throw DataError("warm start dimension mismatch");
    for (int a = 0; a < da; ++a) beta_[a] = ws.betas(std_.active[static_cast<std::size_t>(a)], 0) *
                                            std_.sd[std_.active[static_cast<std::size_t>(a)]];
  }

  Eigen::VectorXd beta = beta_;
  Eigen::VectorXd q = gram_ * beta;  // (Gram) * beta, maintained incrementally

  auto internal_kkt = [&]() {
    double viol = 0.0;
    for (int j = 0; j < da; ++j) {
      const double grad = q[j] - xty_[j];
      const double v = beta[j] != 0.0
                           ? std::abs(grad + lambda * (beta[j] > 0 ? 1.0 : -1.0))
                           : std::max(0.0, std::abs(grad) - lambda);
      viol = std::max(viol, v);
    }
    return viol;
  };

#ifndef NDEBUG
  auto objective = [&]() {
    return 0.5 * yc_sq_mean_ - xty_.dot(beta) + 0.5 * beta.dot(q) +
           lambda * beta.cwiseAbs().sum();
  };
  double prev_obj = objective();
#endif

  int sweeps = 0;
  double kkt = std::numeric_limits<double>::infinity();
  bool converged = false;
  while (sweeps < opts.max_sweeps) {
    ++sweeps;
    double max_delta = 0.0;
    for (int j = 0; j < da; ++j) {
      const double gjj = gram_(j, j);
      const double u = xty_[j] - q[j] + gjj * beta[j];
      const double bj = soft_threshold(u, lambda) / gjj;
      const double delta = bj - beta[j];
      if (delta != 0.0) {
        beta[j] = bj;
        q += gram_.col(j) * delta;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
#ifndef NDEBUG
    const double obj = objective();
    assert(obj <= prev_obj + 1e-10 * (1.0 + std::abs(prev_obj)) &&
           "objective increased across a coordinate-descent sweep");
    prev_obj = obj;
#endif
    if (max_delta < opts.tol) {
      kkt = internal_kkt();
      if (kkt <= opts.kkt_target || max_delta == 0.0) {
        converged = kkt <= std::max(opts.kkt_target, 1e-6);
        break;
      }
    }
  }
  if (!converged && kkt == std::numeric_limits<double>::infinity()) kkt = internal_kkt();
  if (!converged)
    throw NumericalError("gaussian lasso did not converge after " + std::to_string(sweeps) +
                         " sweeps (kkt violation " + std::to_string(kkt) + ")");

  beta_ = beta;  // warm state for the next lambda

  double b0 = y_mean_;
  for (int a = 0; a < da; ++a) {
    const int j = std_.active[static_cast<std::size_t>(a)];
    out.betas(j, 0) = beta[a] / std_.sd[j];
    b0 -= out.betas(j, 0) * std_.mean[j];
  }
  out.intercepts[0] = b0;
  Eigen::VectorXd resid = y_ - Eigen::VectorXd::Constant(n, b0) - (*X_) * out.betas.col(0);
  const double rmean = resid.mean();
  out.residual_sigma =
      n > 1 ? std::sqrt((resid.array() - rmean).square().sum() / (n - 1)) : 0.0;

  if (info) *info = SolveInfo{sweeps, kkt, true, false};
  return out;
}

// ---------------------------------------------------------------------------
// Symmetric multinomial lasso. Outer loop majorizes the log-likelihood per
// class block with the curvature bound 1/4 (softmax curvature p(1-p) <= 1/4),
// which keeps the penalized objective monotone; inner coordinate descent
// solves each block's quadratic on the shared Gram matrix.

MultinomialCoordinateDescent::MultinomialCoordinateDescent(const Eigen::MatrixXd& X,
                                                           const Eigen::VectorXd& y,
                                                           int levels)
    : X_(&X), levels_(levels) {
  check_inputs(X, y, 0.0);
  if (levels < 2) throw DataError("multinomial needs at least 2 levels");
  const int n = static_cast<int>(X.rows());
  indicators_ = Eigen::MatrixXd::Zero(n, levels);
  for (int i = 0; i < n; ++i) {
    const double r = std::nearbyint(y[i]);
    if (r != y[i] || r < 1 || r > levels)
      throw DataError("category code out of range [1," + std::to_string(levels) +
                      "] at row " + std::to_string(i + 1));
    indicators_(i, static_cast<int>(r) - 1) = 1.0;
  }
  marginals_ = indicators_.colwise().mean().transpose();
  for (int k = 0; k < levels; ++k)
    if (marginals_[k] == 0.0)
      throw DataError("category " + std::to_string(k + 1) + " absent from response");
  std_ = detail::standardize_columns(X);
  Xs_ = detail::standardized_design(X, std_);
  gram_ = Xs_.transpose() * Xs_ / n;
  beta_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(std_.active.size()), levels);
  intercepts_ = marginals_.array().log();
}

void MultinomialCoordinateDescent::reset() {
  beta_.setZero();
  intercepts_ = marginals_.array().log();
}

double MultinomialCoordinateDescent::lambda_max() const {
  const int n = static_cast<int>(Xs_.rows());
  const Eigen::VectorXd null_mu = marginals_.array().log();
  const Eigen::VectorXd p0 = row_softmax(null_mu);
  const Eigen::VectorXd col_means = Xs_.colwise().mean().transpose();
  double lmax = 0.0;
  for (int k = 0; k < levels_; ++k) {
    const Eigen::VectorXd g = Eigen::VectorXd::Constant(n, p0[k]) - indicators_.col(k);
    const double gbar = g.mean();
    const Eigen::VectorXd grad = Xs_.transpose() * g / n - gbar * col_means;
    if (grad.size()) lmax = std::max(lmax, grad.cwiseAbs().maxCoeff());
  }
  return lmax;
}

CoefficientSet MultinomialCoordinateDescent::solve(double lambda, const SolveOptions& opts,
                                                   SolveInfo* info) {
  if (lambda < 0) throw DataError("lambda must be non-negative");
  const int n = static_cast<int>(X_->rows());
  const int d = static_cast<int>(X_->cols());
  const int da = static_cast<int>(std_.active.size());
  const int K = levels_;
  const double w = 0.25;  // curvature bound for the softmax likelihood

  if (opts.warm_start != nullptr) {
    const auto& ws = *opts.warm_start;
    if (ws.betas.rows() != d || ws.betas.cols() != K || ws.intercepts.size() != K)
      throw DataError("warm start dimension mismatch");
    for (int a = 0; a < da; ++a) {
      const int j = std_.active[static_cast<std::size_t>(a)];
      for (int k = 0; k < K; ++k) beta_(a, k) = ws.betas(j, k) * std_.sd[j];
    }
    for (int k = 0; k < K; ++k) {
      double b0 = ws.intercepts[k];
      for (int a = 0; a < da; ++a) {
        const int j = std_.active[static_cast<std::size_t>(a)];
        b0 += ws.betas(j, k) * std_.mean[j];
      }
      intercepts_[k] = b0;
    }
  }

  Eigen::MatrixXd beta = beta_;
  Eigen::VectorXd intercepts = intercepts_;
  const Eigen::VectorXd col_means = Xs_.colwise().mean().transpose();

  // eta maintained per class; probabilities recomputed before each block.
  Eigen::MatrixXd eta = Xs_ * beta;
  eta.rowwise() += intercepts.transpose();

  auto probabilities = [&]() {
    Eigen::MatrixXd P(n, K);
    for (int i = 0; i < n; ++i) P.row(i) = row_softmax(eta.row(i).transpose()).transpose();
    return P;
  };

  auto penalized_objective = [&]() {
    double nll = 0.0;
    for (int i = 0; i < n; ++i) {
      const double shift = eta.row(i).maxCoeff();
      const double lse = shift + std::log((eta.row(i).array() - shift).exp().sum());
      nll += lse - eta.row(i).dot(indicators_.row(i));
    }
    return nll / n + lambda * beta.cwiseAbs().sum();
  };

#ifndef NDEBUG
  double prev_obj = penalized_objective();
#endif

  int sweeps = 0;
  double kkt = std::numeric_limits<double>::infinity();
  bool converged = false;
  while (sweeps < opts.max_sweeps) {
    ++sweeps;
    double max_delta = 0.0;
    for (int k = 0; k < K; ++k) {
      const Eigen::MatrixXd P = probabilities();
      // Working response for the majorized quadratic around current eta_k.
      const Eigen::VectorXd g = P.col(k) - indicators_.col(k);
      const Eigen::VectorXd z = eta.col(k) - g / w;
      const double z_mean = z.mean();
      const Eigen::VectorXd cz = Xs_.transpose() * z / n;

      Eigen::VectorXd b = beta.col(k);
      Eigen::VectorXd v = gram_ * b;
      double b0 = intercepts[k];
      for (int inner = 0; inner < 1000; ++inner) {
        double inner_delta = 0.0;
        const double b0_new = z_mean - col_means.dot(b);
        if (b0_new != b0) {
          inner_delta = std::abs(b0_new - b0);
          b0 = b0_new;
        }
        for (int j = 0; j < da; ++j) {
          const double gjj = gram_(j, j);
          const double u = w * (cz[j] - b0 * col_means[j] - v[j] + gjj * b[j]);
          const double bj = soft_threshold(u, lambda) / (w * gjj);
          const double delta = bj - b[j];
          if (delta != 0.0) {
            b[j] = bj;
            v += gram_.col(j) * delta;
            inner_delta = std::max(inner_delta, std::abs(delta));
          }
        }
        if (inner_delta < std::min(opts.tol, 1e-9)) break;
      }
      max_delta = std::max(max_delta, (b - beta.col(k)).cwiseAbs().maxCoeff());
      max_delta = std::max(max_delta, std::abs(b0 - intercepts[k]));
      beta.col(k) = b;
      intercepts[k] = b0;
      eta.col(k) = Xs_ * b;
      eta.col(k).array() += b0;
    }
#ifndef NDEBUG
    const double obj = penalized_objective();
    assert(obj <= prev_obj + 1e-9 * (1.0 + std::abs(prev_obj)) &&
           "objective increased across a multinomial outer cycle");
    prev_obj = obj;
#endif
    if (max_delta < opts.tol) {
      const Eigen::MatrixXd P = probabilities();
      double viol = 0.0;
      for (int k = 0; k < K; ++k) {
        const Eigen::VectorXd g = Xs_.transpose() * (P.col(k) - indicators_.col(k)) / n;
        for (int j = 0; j < da; ++j) {
          const double vj = beta(j, k) != 0.0
                                ? std::abs(g[j] + lambda * (beta(j, k) > 0 ? 1.0 : -1.0))
                                : std::max(0.0, std::abs(g[j]) - lambda);
          viol = std::max(viol, vj);
        }
        viol = std::max(viol, std::abs((P.col(k) - indicators_.col(k)).mean()));
      }
      kkt = viol;
      if (kkt <= opts.kkt_target || max_delta == 0.0) {
        converged = kkt <= std::max(opts.kkt_target, 1e-6);
        break;
      }
    }
  }

  bool separation = false;
  if (!converged) {
    if (kkt == std::numeric_limits<double>::infinity()) {
      const Eigen::MatrixXd P = probabilities();
      double viol = 0.0;
      for (int k = 0; k < K; ++k) {
        const Eigen::VectorXd g = Xs_.transpose() * (P.col(k) - indicators_.col(k)) / n;
        for (int j = 0; j < da; ++j) viol = std::max(viol, std::abs(g[j]));
      }
      kkt = viol;
    }
    if (lambda == 0.0) {
      // Unpenalized fits on separable data diverge; flag instead of failing.
      separation = true;
    } else {
      throw NumericalError("multinomial lasso did not converge after " +
                           std::to_string(sweeps) + " sweeps (kkt violation " +
                           std::to_string(kkt) + ")");
    }
  }

  beta_ = beta;
  intercepts_ = intercepts;

  CoefficientSet out;
  out.betas = Eigen::MatrixXd::Zero(d, K);
  out.intercepts = Eigen::VectorXd::Zero(K);
  for (int k = 0; k < K; ++k) {
    double b0 = intercepts[k];
    for (int a = 0; a < da; ++a) {
      const int j = std_.active[static_cast<std::size_t>(a)];
      out.betas(j, k) = beta(a, k) / std_.sd[j];
      b0 -= out.betas(j, k) * std_.mean[j];
    }
    out.intercepts[k] = b0;
  }
  out.intercepts.array() -= out.intercepts.mean();  // sum-to-zero gauge

  if (info) *info = SolveInfo{sweeps, kkt, converged, separation};
  return out;
}

// ---------------------------------------------------------------------------

CoefficientSet fit_gaussian_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  double lambda, const SolveOptions& opts, SolveInfo* info) {
  GaussianCoordinateDescent solver(X, y);
  return solver.solve(lambda, opts, info);
}

CoefficientSet fit_multinomial_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     int levels, double lambda, const SolveOptions& opts,
                                     SolveInfo* info) {
  MultinomialCoordinateDescent solver(X, y, levels);
  return solver.solve(lambda, opts, info);
}

Eigen::MatrixXd multinomial_probabilities(const Eigen::MatrixXd& X,
                                          const CoefficientSet& coef) {
  const int n = static_cast<int>(X.rows());
  const int K = static_cast<int>(coef.intercepts.size());
  Eigen::MatrixXd mu = X * coef.betas;
  mu.rowwise() += coef.intercepts.transpose();
  Eigen::MatrixXd P(n, K);
  for (int i = 0; i < n; ++i) P.row(i) = row_softmax(mu.row(i).transpose()).transpose();
  return P;
}

double kkt_violation(const LassoProblem& problem, const CoefficientSet& solution) {
  const Eigen::MatrixXd& X = problem.X;
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  const int K = problem.family == Family::multinomial ? problem.levels : 1;
  if (solution.betas.rows() != d || solution.betas.cols() != K ||
      solution.intercepts.size() != K)
    throw DataError("solution dimensions do not match problem");

  const auto std_ = detail::standardize_columns(X);
  const Eigen::MatrixXd Xs = detail::standardized_design(X, std_);
  const double lambda = problem.lambda;
  double viol = 0.0;

  auto coordinate_violation = [&](double beta_std, double grad) {
    return beta_std != 0.0 ? std::abs(grad + lambda * (beta_std > 0 ? 1.0 : -1.0))
                           : std::max(0.0, std::abs(grad) - lambda);
  };

  if (problem.family == Family::gaussian) {
    const Eigen::VectorXd resid = problem.y -
                                  Eigen::VectorXd::Constant(n, solution.intercepts[0]) -
                                  X * solution.betas.col(0);
    const Eigen::VectorXd grad = -(Xs.transpose() * resid) / n;
    for (std::size_t a = 0; a < std_.active.size(); ++a) {
      const int j = std_.active[a];
      viol = std::max(viol, coordinate_violation(solution.betas(j, 0) * std_.sd[j],
                                                 grad[static_cast<Eigen::Index>(a)]));
    }
    return viol;
  }

  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, K);
  for (int i = 0; i < n; ++i) {
    const double r = std::nearbyint(problem.y[i]);
    if (r != problem.y[i] || r < 1 || r > K)
      throw DataError("category code out of range in problem response");
    Y(i, static_cast<int>(r) - 1) = 1.0;
  }
  const Eigen::MatrixXd P = multinomial_probabilities(X, solution);
  for (int k = 0; k < K; ++k) {
    const Eigen::VectorXd g = P.col(k) - Y.col(k);
    const Eigen::VectorXd grad = Xs.transpose() * g / n;
    for (std::size_t a = 0; a < std_.active.size(); ++a) {
      const int j = std_.active[a];
      viol = std::max(viol, coordinate_violation(solution.betas(j, k) * std_.sd[j],
                                                 grad[static_cast<Eigen::Index>(a)]));
    }
  }
  return viol;
}

double gaussian_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const CoefficientSet& coef, double lambda) {
  const int n = static_cast<int>(X.rows());
  const auto std_ = detail::standardize_columns(X);
  const Eigen::VectorXd resid =
      y - Eigen::VectorXd::Constant(n, coef.intercepts[0]) - X * coef.betas.col(0);
  double penalty = 0.0;
  for (std::size_t a = 0; a < std_.active.size(); ++a) {
    const int j = std_.active[a];
    penalty += std::abs(coef.betas(j, 0) * std_.sd[j]);
  }
  return 0.5 * resid.squaredNorm() / n + lambda * penalty;
}

double multinomial_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             int levels, const CoefficientSet& coef, double lambda) {
  const int n = static_cast<int>(X.rows());
  const auto std_ = detail::standardize_columns(X);
  const Eigen::MatrixXd P = multinomial_probabilities(X, coef);
  double nll = 0.0;
  for (int i = 0; i < n; ++i) {
    const int k = static_cast<int>(std::nearbyint(y[i])) - 1;
    if (k < 0 || k >= levels) throw DataError("category code out of range in response");
    nll -= std::log(std::max(P(i, k), 1e-300));
  }
  double penalty = 0.0;
  for (std::size_t a = 0; a < std_.active.size(); ++a) {
    const int j = std_.active[a];
    for (int k = 0; k < levels; ++k) penalty += std::abs(coef.betas(j, k) * std_.sd[j]);
  }
  return nll / n + lambda * penalty;
}

}  // namespace netpred
