#include "netpred/predictability.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "netpred/errors.hpp"

namespace netpred {

namespace {

double sample_variance(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  if (n < 2) throw DataError("variance needs at least 2 observations");
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / (n - 1);
}

void check_row(const NodeModel& model, const Eigen::VectorXd& x) {
  if (x.size() != static_cast<Eigen::Index>(model.terms.size()))
    throw DataError("prediction row supplies " + std::to_string(x.size()) +
                    " values but the model references " +
                    std::to_string(model.terms.size()) + " predictors");
  if (!x.allFinite()) throw DataError("missing predictor value");
}

int modal_category(const Eigen::VectorXd& marginals) {
  int best = 0;
  for (int k = 1; k < marginals.size(); ++k)
    if (marginals[k] > marginals[best]) best = k;
  return best + 1;
}

// Measures for one categorical node given its predictions and the training
// marginals. CCmarg is the accuracy, on this data, of always predicting the
// training modal category; nCC is normalized with the training marginals.
NodeMeasures categorical_measures(int node, const Eigen::VectorXi& predicted,
                                  const Eigen::VectorXi& observed,
                                  const Eigen::VectorXd& train_marginals) {
  NodeMeasures out;
  out.node = node;
  out.kind = VarKind::categorical;
  out.cc = accuracy(predicted, observed);
  const int modal = modal_category(train_marginals);
  const Eigen::VectorXi modal_pred = Eigen::VectorXi::Constant(observed.size(), modal);
  out.ccmarg = accuracy(modal_pred, observed);
  const double max_p = marginal_accuracy(train_marginals);
  out.ncc = max_p < 1.0 ? normalized_accuracy(out.cc, train_marginals)
                        : std::numeric_limits<double>::quiet_NaN();
  return out;
}

Eigen::VectorXd design_row(const Dataset& d, const std::vector<PredictorTerm>& terms,
                           int row) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(terms.size()));
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& term = terms[t];
    const int r = row - term.lag;
    x[static_cast<Eigen::Index>(t)] =
        term.category == 0 ? d.value(r, term.source)
                           : (d.code(r, term.source) == term.category ? 1.0 : 0.0);
  }
  return x;
}

}  // namespace

double predict_gaussian(const NodeModel& model, const Eigen::VectorXd& x) {
  check_row(model, x);
  if (model.family != Family::gaussian) throw DataError("node is not continuous");
  return model.coef.intercepts[0] + model.coef.betas.col(0).dot(x);
}

CategoricalPrediction predict_categorical(const NodeModel& model, const Eigen::VectorXd& x) {
  check_row(model, x);
  if (model.family != Family::multinomial) throw DataError("node is not categorical");
  Eigen::VectorXd mu = model.coef.intercepts + model.coef.betas.transpose() * x;
  const double shift = mu.maxCoeff();
  Eigen::VectorXd e = (mu.array() - shift).exp();
  CategoricalPrediction out;
  out.probabilities = e / e.sum();
  out.category = 1;
  for (int k = 1; k < out.probabilities.size(); ++k)
    if (out.probabilities[k] > out.probabilities[out.category - 1]) out.category = k + 1;
  return out;
}

double r_squared(const Eigen::VectorXd& predicted, const Eigen::VectorXd& observed) {
  if (predicted.size() != observed.size())
    throw DataError("prediction and observation lengths differ");
  if (predicted.size() < 2) throw DataError("r_squared needs at least 2 observations");
  const double var_obs = sample_variance(observed);
  if (var_obs == 0.0) throw DataError("observed vector has zero variance");
  return 1.0 - sample_variance(predicted - observed) / var_obs;
}

double accuracy(const Eigen::VectorXi& predicted, const Eigen::VectorXi& observed) {
  if (predicted.size() != observed.size())
    throw DataError("prediction and observation lengths differ");
  if (predicted.size() < 1) throw DataError("accuracy needs at least 1 observation");
  int hits = 0;
  for (int i = 0; i < predicted.size(); ++i) hits += predicted[i] == observed[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double normalized_accuracy(double acc, const Eigen::VectorXd& marginals) {
  const double max_p = marginal_accuracy(marginals);
  if (max_p >= 1.0) throw DataError("degenerate marginal: one category has probability 1");
  return (acc - max_p) / (1.0 - max_p);
}

double marginal_accuracy(const Eigen::VectorXd& marginals) {
  if (marginals.size() < 1) throw DataError("empty marginal distribution");
  if (marginals.minCoeff() < -1e-12 || std::abs(marginals.sum() - 1.0) > 1e-9)
    throw DataError("marginals must form a probability distribution");
  return marginals.maxCoeff();
}

Predictions predict_node(const PairwiseMGM& model, const Dataset& d, int node) {
  const NodeModel& nm = model.nodes[static_cast<std::size_t>(node)];
  Predictions out;
  out.node = node;
  out.kind = d.var(node).kind;
  const int n = d.n();
  if (nm.family == Family::gaussian) {
    out.values.resize(n);
    for (int i = 0; i < n; ++i)
      out.values[i] = predict_gaussian(nm, design_row(d, nm.terms, i));
  } else {
    out.probabilities.resize(n, nm.levels);
    out.categories.resize(n);
    for (int i = 0; i < n; ++i) {
      const CategoricalPrediction pred = predict_categorical(nm, design_row(d, nm.terms, i));
      out.probabilities.row(i) = pred.probabilities.transpose();
      out.categories[i] = pred.category;
    }
  }
  return out;
}

std::vector<Predictions> predict_all(const VARModel& model, const Dataset& d,
                                     const std::optional<TimeIndex>& time) {
  const LaggedDesign design = build_lagged_design(d, model.lags, time);
  std::vector<Predictions> out;
  out.reserve(model.nodes.size());
  for (const NodeModel& nm : model.nodes) {
    Predictions pred;
    pred.node = nm.node;
    pred.kind = nm.family == Family::gaussian ? VarKind::continuous : VarKind::categorical;
    const int m = static_cast<int>(design.X.rows());
    if (nm.family == Family::gaussian) {
      pred.values.resize(m);
      for (int i = 0; i < m; ++i)
        pred.values[i] = predict_gaussian(nm, design.X.row(i).transpose());
    } else {
      pred.probabilities.resize(m, nm.levels);
      pred.categories.resize(m);
      for (int i = 0; i < m; ++i) {
        const CategoricalPrediction cp = predict_categorical(nm, design.X.row(i).transpose());
        pred.probabilities.row(i) = cp.probabilities.transpose();
        pred.categories[i] = cp.category;
      }
    }
    out.push_back(std::move(pred));
  }
  return out;
}

PredictabilityReport evaluate(const PairwiseMGM& model, const Dataset& d,
                              SampleKind sample_kind) {
  if (d.spec() != model.spec) throw DataError("spec mismatch between model and data");
  if (d.n() < 2) throw DataError("insufficient rows for evaluation");
  PredictabilityReport report;
  report.sample_kind = sample_kind;
  for (int node = 0; node < d.p(); ++node) {
    const Predictions pred = predict_node(model, d, node);
    NodeMeasures m;
    if (pred.kind == VarKind::continuous) {
      m.node = node;
      m.kind = VarKind::continuous;
      m.r2 = r_squared(pred.values, d.column(node));
    } else {
      Eigen::VectorXi observed(d.n());
      for (int i = 0; i < d.n(); ++i) observed[i] = d.code(i, node);
      m = categorical_measures(node, pred.categories, observed,
                               model.train_marginals[static_cast<std::size_t>(node)]);
    }
    report.nodes.push_back(m);
  }
  return report;
}

PredictabilityReport evaluate(const VARModel& model, const Dataset& d,
                              const std::optional<TimeIndex>& time, SampleKind sample_kind) {
  if (d.spec() != model.spec) throw DataError("spec mismatch between model and data");
  const LaggedDesign design = build_lagged_design(d, model.lags, time);
  const std::vector<Predictions> preds = predict_all(model, d, time);
  PredictabilityReport report;
  report.sample_kind = sample_kind;
  for (std::size_t idx = 0; idx < preds.size(); ++idx) {
    const Predictions& pred = preds[idx];
    const int node = pred.node;
    NodeMeasures m;
    if (pred.kind == VarKind::continuous) {
      m.node = node;
      m.kind = VarKind::continuous;
      m.r2 = r_squared(pred.values, design.Y.col(node));
    } else {
      const int n_kept = static_cast<int>(design.Y.rows());
      Eigen::VectorXi observed(n_kept);
      for (int i = 0; i < n_kept; ++i)
        observed[i] = static_cast<int>(design.Y(i, node));
      m = categorical_measures(node, pred.categories, observed,
                               model.train_marginals[static_cast<std::size_t>(node)]);
    }
    report.nodes.push_back(m);
  }
  return report;
}

}  // namespace netpred
