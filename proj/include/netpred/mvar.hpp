#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "netpred/cv.hpp"
#include "netpred/data.hpp"
#include "netpred/design.hpp"

namespace netpred {

struct LaggedDesign {
  Eigen::MatrixXd X;                 // m x (design columns over all lags)
  std::vector<PredictorTerm> terms;  // lag recorded per column
  Eigen::MatrixXd Y;                 // m x p responses at the kept rows
  std::vector<int> kept_rows;        // 0-based response row indices
};

// Lagged design with consecutiveness filtering: response row t enters iff,
// for every lag l, row t-l exists, shares the same day, and
// beep(t) - beep(t-l) == l. Without a time index every row t >= max(lags)
// enters. Refuses to proceed with fewer than min_rows usable rows; fitting
// keeps the default of 20.
LaggedDesign build_lagged_design(const Dataset& d, const std::vector<int>& lags,
                                 const std::optional<TimeIndex>& time, int min_rows = 20);

struct MvarOptions {
  std::vector<int> lags = {1};
  CvConfig cv;
  std::uint64_t seed = 0;
  int threads = 1;
  std::optional<double> fixed_lambda;
};

struct VARModel {
  std::vector<VariableSpec> spec;
  std::vector<int> lags;
  std::uint64_t seed = 0;
  std::vector<NodeModel> nodes;
  // Aggregated network, lag-major: coefficients[l](i, j) is the effect of
  // variable j at t - lags[l] on variable i at t. Continuous-continuous
  // entries carry the raw signed coefficient; entries touching a categorical
  // variable carry the mean absolute value of the category block.
  std::vector<Eigen::MatrixXd> coefficients;
  Eigen::VectorXd intercepts;       // per node; 0 for categorical nodes
  Eigen::VectorXd residual_sigmas;  // per node; 0 for categorical nodes
  std::vector<double> per_node_lambda;
  Eigen::VectorXd centering_means;
  std::optional<Eigen::VectorXd> scales;
  std::vector<Eigen::VectorXd> train_marginals;
};

// Per-response l1-regularized regression on the shared lagged design.
// Self-lag coefficients are retained; directionality is preserved.
VARModel fit_mvar(const Dataset& d, const std::optional<TimeIndex>& time,
                  const MvarOptions& options = {});

}  // namespace netpred
