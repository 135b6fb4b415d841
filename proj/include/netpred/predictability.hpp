#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "netpred/data.hpp"
#include "netpred/design.hpp"
#include "netpred/mgm.hpp"
#include "netpred/mvar.hpp"

namespace netpred {

// Conditional-mean prediction for a continuous node: intercept + beta . x.
// x must supply every predictor the model references, in term order.
double predict_gaussian(const NodeModel& model, const Eigen::VectorXd& x);

struct CategoricalPrediction {
  Eigen::VectorXd probabilities;  // sums to 1
  int category = 1;               // argmax, lowest index on exact ties
};

// Class probabilities exp(mu_k) / sum_l exp(mu_l), max-shifted for overflow
// safety, with mu_k = intercept_k + beta_k . x.
CategoricalPrediction predict_categorical(const NodeModel& model, const Eigen::VectorXd& x);

// R^2 = 1 - var(predicted - observed) / var(observed), sample variances.
// May be negative out of sample. Throws on zero-variance observations.
double r_squared(const Eigen::VectorXd& predicted, const Eigen::VectorXd& observed);

// Fraction of exact matches between code vectors.
double accuracy(const Eigen::VectorXi& predicted, const Eigen::VectorXi& observed);

// (acc - max p) / (1 - max p); unclamped, may be negative.
double normalized_accuracy(double acc, const Eigen::VectorXd& marginals);

// max_k p_k: the accuracy of always predicting the modal category on data
// drawn at those marginals.
double marginal_accuracy(const Eigen::VectorXd& marginals);

enum class SampleKind { within_sample, out_of_sample };

struct NodeMeasures {
  int node = 0;
  VarKind kind = VarKind::continuous;
  // Continuous nodes report r2; categorical nodes report cc / ncc / ccmarg.
  double r2 = 0.0;
  double cc = 0.0;
  double ncc = 0.0;
  double ccmarg = 0.0;
};

struct PredictabilityReport {
  SampleKind sample_kind = SampleKind::within_sample;
  std::vector<NodeMeasures> nodes;
};

struct Predictions {
  int node = 0;
  VarKind kind = VarKind::continuous;
  Eigen::VectorXd values;         // continuous
  Eigen::MatrixXd probabilities;  // categorical, n x K
  Eigen::VectorXi categories;     // categorical
};

// Per-row nodewise predictions over a dataset (same-row neighbors for the
// MGM; lagged rows for the VAR model).
Predictions predict_node(const PairwiseMGM& model, const Dataset& d, int node);
std::vector<Predictions> predict_all(const VARModel& model, const Dataset& d,
                                     const std::optional<TimeIndex>& time);

// Nodewise predictability: R^2 for continuous nodes; accuracy, normalized
// accuracy and marginal accuracy for categorical nodes. The dataset must be
// centered with the model's training means; normalization marginals come
// from the training data.
PredictabilityReport evaluate(const PairwiseMGM& model, const Dataset& d,
                              SampleKind sample_kind = SampleKind::within_sample);
PredictabilityReport evaluate(const VARModel& model, const Dataset& d,
                              const std::optional<TimeIndex>& time,
                              SampleKind sample_kind = SampleKind::within_sample);

}  // namespace netpred
