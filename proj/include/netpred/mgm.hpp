#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "netpred/cv.hpp"
#include "netpred/data.hpp"
#include "netpred/design.hpp"

namespace netpred {

enum class EdgeRule { OR, AND };

struct MgmOptions {
  EdgeRule rule = EdgeRule::OR;
  CvConfig cv;
  std::uint64_t seed = 0;
  bool binary_sign = false;
  int threads = 1;
  // Bypasses cross-validation with one shared penalty for every node.
  std::optional<double> fixed_lambda;
};

struct PairwiseMGM {
  std::vector<VariableSpec> spec;
  EdgeRule rule = EdgeRule::OR;
  bool binary_sign = false;
  std::uint64_t seed = 0;
  std::vector<NodeModel> nodes;
  Eigen::MatrixXd wadj;   // p x p symmetric non-negative, zero diagonal
  Eigen::MatrixXi signs;  // {+1, -1, 0 = undefined}
  // Training transform and marginals, kept for out-of-sample evaluation.
  Eigen::VectorXd centering_means;
  std::optional<Eigen::VectorXd> scales;
  std::vector<Eigen::VectorXd> train_marginals;  // empty for continuous nodes
};

// Nodewise l1-regularized neighborhood regression with per-node
// cross-validated penalties, combined into one network under the edge rule.
// Requires a centered dataset, n > 10 and p >= 2.
PairwiseMGM fit_mgm(const Dataset& d, const MgmOptions& options = {});

// OR: edge (i,j) present if j in N(i) or i in N(j); AND needs both.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> combine_neighborhoods(
    const std::vector<std::vector<int>>& neighborhoods, EdgeRule rule);

// Aggregates cross-regression coefficients into edge weights (mean absolute
// value over all coefficients linking the pair, from both regressions) and
// edge signs (+1/-1 when every nonzero sign-eligible coefficient agrees,
// else 0). Edges whose collected coefficients are all zero are dropped.
void edge_weights(const std::vector<NodeModel>& models,
                  const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& adjacency,
                  const std::vector<VariableSpec>& spec, bool binary_sign,
                  Eigen::MatrixXd& wadj, Eigen::MatrixXi& signs);

}  // namespace netpred
