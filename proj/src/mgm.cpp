#include "netpred/mgm.hpp"

#include <cmath>

#include "netpred/errors.hpp"
#include "netpred/rng.hpp"
#include "netpred/threads.hpp"

namespace netpred {

namespace {

// Intercept-only model for a constant column; joins no edges.
NodeModel intercept_only_model(const Dataset& d, int node, const NodeDesign& design) {
  NodeModel m;
  m.node = node;
  m.terms = design.terms;
  const auto& v = d.var(node);
  if (v.kind == VarKind::continuous) {
    m.family = Family::gaussian;
    m.levels = 1;
    m.coef.intercepts = Eigen::VectorXd::Constant(1, d.column(node).mean());
    m.coef.betas = Eigen::MatrixXd::Zero(design.X.cols(), 1);
    m.coef.residual_sigma = 0.0;
  } else {
    m.family = Family::multinomial;
    m.levels = v.levels;
    const Eigen::VectorXd marg = marginal_distribution(d.column(node), v.levels);
    Eigen::VectorXd intercepts = (marg.array() + 1e-12).log();
    intercepts.array() -= intercepts.mean();
    m.coef.intercepts = intercepts;
    m.coef.betas = Eigen::MatrixXd::Zero(design.X.cols(), v.levels);
  }
  return m;
}

bool is_constant(const Eigen::VectorXd& column) {
  return column.maxCoeff() == column.minCoeff();
}

// Categorical with every observation in one category cannot be regressed.
bool degenerate_categorical(const Dataset& d, int node) {
  return d.var(node).kind == VarKind::categorical && is_constant(d.column(node));
}

NodeModel fit_node(const Dataset& d, int node, const MgmOptions& options) {
  const NodeDesign design = build_node_design(d, node);
  const Eigen::VectorXd y = d.column(node);
  const auto& v = d.var(node);

  if (degenerate_categorical(d, node) ||
      (v.kind == VarKind::continuous && is_constant(y)))
    return intercept_only_model(d, node, design);

  NodeModel m;
  m.node = node;
  m.terms = design.terms;
  m.family = v.kind == VarKind::continuous ? Family::gaussian : Family::multinomial;
  m.levels = v.levels;

  if (options.fixed_lambda) {
    m.lambda = *options.fixed_lambda;
  } else {
    CvConfig cv = options.cv;
    cv.seed = Rng::derive(options.seed, static_cast<std::uint64_t>(node));
    m.lambda = select_lambda(design.X, y, m.family, m.levels, cv).best_lambda;
  }

  if (m.family == Family::gaussian) {
    m.coef = fit_gaussian_lasso(design.X, y, m.lambda);
  } else {
    m.coef = fit_multinomial_lasso(design.X, y, m.levels, m.lambda);
  }
  return m;
}

// Index of the beta row holding the coefficient that links `model` to the
// sign-carrying part of variable `partner` (raw value for continuous,
// category-2 indicator for binary), or -1.
int sign_term_row(const NodeModel& model, int partner, const std::vector<VariableSpec>& spec) {
  const auto& pv = spec[static_cast<std::size_t>(partner)];
  const int wanted_category = pv.kind == VarKind::continuous ? 0 : 2;
  for (std::size_t t = 0; t < model.terms.size(); ++t)
    if (model.terms[t].source == partner && model.terms[t].category == wanted_category)
      return static_cast<int>(t);
  return -1;
}

// Sign-carrying coefficient of `partner` inside `model`'s regression:
// gaussian responses read the partner column directly; binary responses read
// the class-2 row of the multinomial coefficients.
double signed_coefficient(const NodeModel& model, int partner,
                          const std::vector<VariableSpec>& spec) {
  const int row = sign_term_row(model, partner, spec);
  if (row < 0) return 0.0;
  const int col = model.family == Family::gaussian ? 0 : 1;  // class 2 for binary
  return model.coef.betas(row, col);
}

bool sign_eligible(const VariableSpec& v, bool binary_sign) {
  if (v.kind == VarKind::continuous) return true;
  return binary_sign && v.levels == 2;
}

}  // namespace

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> combine_neighborhoods(
    const std::vector<std::vector<int>>& neighborhoods, EdgeRule rule) {
  const int p = static_cast<int>(neighborhoods.size());
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> selected(p, p);
  selected.setConstant(false);
  for (int i = 0; i < p; ++i)
    for (const int j : neighborhoods[static_cast<std::size_t>(i)]) {
      if (j < 0 || j >= p) throw DataError("neighbor index out of range");
      if (j == i) throw DataError("a node cannot neighbor itself");
      selected(i, j) = true;
    }
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency(p, p);
  adjacency.setConstant(false);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      const bool present = rule == EdgeRule::OR ? (selected(i, j) || selected(j, i))
                                                : (selected(i, j) && selected(j, i));
      adjacency(i, j) = adjacency(j, i) = present;
    }
  return adjacency;
}

void edge_weights(const std::vector<NodeModel>& models,
                  const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& adjacency,
                  const std::vector<VariableSpec>& spec, bool binary_sign,
                  Eigen::MatrixXd& wadj, Eigen::MatrixXi& signs) {
  const int p = static_cast<int>(models.size());
  if (adjacency.rows() != p || adjacency.cols() != p)
    throw DataError("adjacency dimension mismatch");
  wadj = Eigen::MatrixXd::Zero(p, p);
  signs = Eigen::MatrixXi::Zero(p, p);

  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (!adjacency(i, j)) continue;

      double abs_sum = 0.0;
      int count = 0;
      // Collect every coefficient linking i and j from both regressions.
      auto collect = [&](const NodeModel& m, int partner) {
        for (std::size_t t = 0; t < m.terms.size(); ++t) {
          if (m.terms[t].source != partner) continue;
          for (int k = 0; k < m.coef.betas.cols(); ++k) {
            abs_sum += std::abs(m.coef.betas(static_cast<Eigen::Index>(t), k));
            ++count;
          }
        }
      };
      collect(models[static_cast<std::size_t>(i)], j);
      collect(models[static_cast<std::size_t>(j)], i);
      if (count == 0 || abs_sum == 0.0) continue;  // edge dropped

      wadj(i, j) = wadj(j, i) = abs_sum / count;

      if (sign_eligible(spec[static_cast<std::size_t>(i)], binary_sign) &&
          sign_eligible(spec[static_cast<std::size_t>(j)], binary_sign)) {
        const double a = signed_coefficient(models[static_cast<std::size_t>(i)], j, spec);
        const double b = signed_coefficient(models[static_cast<std::size_t>(j)], i, spec);
        int sign = 0;
        const bool a_pos = a > 0, a_neg = a < 0, b_pos = b > 0, b_neg = b < 0;
        if ((a_pos || b_pos) && !(a_neg || b_neg)) sign = 1;
        if ((a_neg || b_neg) && !(a_pos || b_pos)) sign = -1;
        signs(i, j) = signs(j, i) = sign;
      }
    }
  }
}

PairwiseMGM fit_mgm(const Dataset& d, const MgmOptions& options) {
  if (!d.centered()) throw DataError("fit_mgm requires a centered dataset");
  if (d.n() <= 10) throw DataError("fit_mgm needs more than 10 rows");
  if (d.p() < 2) throw DataError("fit_mgm needs at least 2 variables");
  if (options.fixed_lambda && *options.fixed_lambda < 0)
    throw DataError("fixed lambda must be non-negative");

  PairwiseMGM model;
  model.spec = d.spec();
  model.rule = options.rule;
  model.binary_sign = options.binary_sign;
  model.seed = options.seed;
  model.centering_means = d.centering_means();
  model.scales = d.scales();
  model.nodes.resize(static_cast<std::size_t>(d.p()));
  model.train_marginals.resize(static_cast<std::size_t>(d.p()));

  parallel_for(d.p(), options.threads, [&](int node) {
    model.nodes[static_cast<std::size_t>(node)] = fit_node(d, node, options);
    if (d.var(node).kind == VarKind::categorical)
      model.train_marginals[static_cast<std::size_t>(node)] =
          marginal_distribution(d.column(node), d.var(node).levels);
  });

  std::vector<std::vector<int>> neighborhoods(static_cast<std::size_t>(d.p()));
  for (int i = 0; i < d.p(); ++i)
    neighborhoods[static_cast<std::size_t>(i)] = neighborhood(model.nodes[static_cast<std::size_t>(i)]);

  const auto adjacency = combine_neighborhoods(neighborhoods, options.rule);
  edge_weights(model.nodes, adjacency, model.spec, options.binary_sign, model.wadj,
               model.signs);
  return model;
}

}  // namespace netpred
