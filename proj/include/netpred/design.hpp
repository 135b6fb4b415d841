#pragma once

#include <Eigen/Dense>
#include <vector>

#include "netpred/data.hpp"
#include "netpred/solver.hpp"

namespace netpred {

// Maps one design column back to its origin: a continuous variable
// (category == 0) or one indicator of a categorical variable
// (category in 1..K). lag is 0 for cross-sectional designs.
struct PredictorTerm {
  int source = 0;
  int category = 0;
  int lag = 0;

  bool operator==(const PredictorTerm&) const = default;
};

struct NodeDesign {
  Eigen::MatrixXd X;
  std::vector<PredictorTerm> terms;
};

// Design for regressing `node` on all other columns: continuous columns as
// stored, categorical columns as overcomplete one-hot blocks.
NodeDesign build_node_design(const Dataset& d, int node);

// One node's fitted regression.
struct NodeModel {
  int node = 0;
  Family family = Family::gaussian;
  int levels = 1;  // K when multinomial
  std::vector<PredictorTerm> terms;
  CoefficientSet coef;
  double lambda = 0.0;
};

// Sources with any nonzero coefficient in the node's regression.
std::vector<int> neighborhood(const NodeModel& model);

}  // namespace netpred
