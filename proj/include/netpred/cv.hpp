#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "netpred/solver.hpp"

namespace netpred {

struct CvConfig {
  int folds = 10;
  int n_lambda = 50;
  double lambda_min_ratio = 1e-3;
  std::uint64_t seed = 0;
};

// Log-spaced decreasing penalty sequence of length n_lambda, anchored at
// lambda_max (the smallest lambda with an all-zero solution) and ending at
// lambda_max * lambda_min_ratio.
std::vector<double> lambda_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                Family family, int levels, const CvConfig& config);

// Fold id per row from a seeded shuffle, stratified by class for the
// multinomial family. Fold sizes differ by at most one.
std::vector<int> assign_folds(const Eigen::VectorXd& y, Family family, int levels,
                              int folds, std::uint64_t seed);

struct CvResult {
  double best_lambda = 0.0;
  int best_index = 0;
  std::vector<double> lambdas;
  std::vector<double> mean_loss;  // mean held-out loss per path entry
};

// K-fold cross-validated penalty selection. Loss is mean squared prediction
// error (gaussian) or mean multinomial log-loss (categorical); fold fits are
// warm-started along the path; ties break toward the larger lambda.
CvResult select_lambda(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Family family,
                       int levels, const CvConfig& config);

}  // namespace netpred
