#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace netpred {

enum class Family { gaussian, multinomial };

struct LassoProblem {
  Eigen::MatrixXd X;  // n x d design
  Eigen::VectorXd y;  // reals, or category codes in [1, K]
  Family family = Family::gaussian;
  int levels = 1;  // K for multinomial
  double lambda = 0.0;
};

// Fitted coefficients on the original predictor scale.
struct CoefficientSet {
  Eigen::VectorXd intercepts;  // length 1 (gaussian) or K (multinomial)
  Eigen::MatrixXd betas;       // d x 1 (gaussian) or d x K (multinomial)
  std::optional<double> residual_sigma;  // gaussian only
};

struct SolveInfo {
  int sweeps = 0;
  double kkt = 0.0;  // internal violation at exit, standardized coordinates
  bool converged = true;
  bool separation_suspect = false;  // multinomial at lambda == 0
};

struct SolveOptions {
  double tol = 1e-7;        // max abs coefficient change per full sweep
  int max_sweeps = 10000;
  double kkt_target = 1e-7;  // keep sweeping until optimality is this tight
  const CoefficientSet* warm_start = nullptr;
};

// Both solvers standardize design columns to zero mean and unit variance
// internally, apply the l1 penalty on that scale, and back-transform the
// solution. Constant columns are excluded and come back with coefficient 0.
// Intercepts are never penalized.

// Minimizes (1/2n) ||y - b0 - X b||^2 + lambda * sum_j |b_j| over the
// standardized design. residual_sigma is the sample standard deviation of
// the residuals. A constant y short-circuits to the intercept-only model.
CoefficientSet fit_gaussian_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  double lambda, const SolveOptions& opts = {},
                                  SolveInfo* info = nullptr);

// Minimizes the mean negative multinomial log-likelihood of the symmetric
// (one coefficient vector per category) parameterization plus
// lambda * sum_{j,k} |b_jk|. All K categories must be present in y.
// Fitted intercepts are reported in the sum-to-zero gauge.
CoefficientSet fit_multinomial_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     int levels, double lambda,
                                     const SolveOptions& opts = {},
                                     SolveInfo* info = nullptr);

// Max subgradient-optimality violation over penalized coordinates, evaluated
// in the same standardized coordinates the solvers optimize in: for active
// b_j, |grad_j + lambda * sign(b_j)|; for zero b_j, max(0, |grad_j| - lambda).
double kkt_violation(const LassoProblem& problem, const CoefficientSet& solution);

// Row-wise class probabilities exp(mu_k) / sum_l exp(mu_l) with
// mu_k = intercept_k + x' beta_k, computed via max-shifted exponentials.
Eigen::MatrixXd multinomial_probabilities(const Eigen::MatrixXd& X,
                                          const CoefficientSet& coef);

// Penalized objective values; used by tests and debug monotonicity checks.
double gaussian_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const CoefficientSet& coef, double lambda);
double multinomial_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             int levels, const CoefficientSet& coef, double lambda);

namespace detail {

// Column standardization shared by the solvers, kkt_violation and the
// regularization-path construction.
struct Standardization {
  Eigen::VectorXd mean;   // length d
  Eigen::VectorXd sd;     // population sd; 0 marks a constant column
  std::vector<int> active;  // columns with sd > 0
};

Standardization standardize_columns(const Eigen::MatrixXd& X);

// Standardized copy of the active columns only.
Eigen::MatrixXd standardized_design(const Eigen::MatrixXd& X, const Standardization& s);

}  // namespace detail

// Stateful path solvers: construction pays the standardization/Gram cost
// once; successive solve() calls warm-start from the previous solution,
// which is what cross-validation wants when walking a lambda path.
class GaussianCoordinateDescent {
 public:
  GaussianCoordinateDescent(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

  CoefficientSet solve(double lambda, const SolveOptions& opts = {}, SolveInfo* info = nullptr);
  void reset();  // drop the warm state
  double lambda_max() const;  // smallest lambda with an all-zero solution

 private:
  const Eigen::MatrixXd* X_;
  detail::Standardization std_;
  Eigen::MatrixXd Xs_;       // n x d_active standardized design
  Eigen::MatrixXd gram_;     // Xs' Xs / n
  Eigen::VectorXd xty_;      // Xs' yc / n
  Eigen::VectorXd y_;
  double y_mean_ = 0.0;
  double yc_sq_mean_ = 0.0;  // yc'yc / n
  bool degenerate_y_ = false;
  Eigen::VectorXd beta_;     // warm state, standardized scale
};

class MultinomialCoordinateDescent {
 public:
  MultinomialCoordinateDescent(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int levels);

  CoefficientSet solve(double lambda, const SolveOptions& opts = {}, SolveInfo* info = nullptr);
  void reset();
  double lambda_max() const;

 private:
  const Eigen::MatrixXd* X_;
  int levels_;
  detail::Standardization std_;
  Eigen::MatrixXd Xs_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd indicators_;  // n x K
  Eigen::VectorXd marginals_;
  Eigen::MatrixXd beta_;        // d_active x K warm state, standardized scale
  Eigen::VectorXd intercepts_;  // length K warm state
};

}  // namespace netpred
