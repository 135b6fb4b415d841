#include "netpred/mvar.hpp"

#include <algorithm>
#include <cmath>

#include "netpred/errors.hpp"
#include "netpred/rng.hpp"
#include "netpred/threads.hpp"

namespace netpred {

LaggedDesign build_lagged_design(const Dataset& d, const std::vector<int>& lags,
                                 const std::optional<TimeIndex>& time) {
  if (lags.empty()) throw DataError("need at least one lag");
  for (const int l : lags)
    if (l < 1) throw DataError("lags must be positive");
  if (time) validate_time_index(*time, d.n());

  const int max_lag = *std::max_element(lags.begin(), lags.end());

  LaggedDesign out;
  for (int t = max_lag; t < d.n(); ++t) {
    bool ok = true;
    for (const int l : lags) {
      if (!time) continue;
      const TimeStamp& now = (*time)[static_cast<std::size_t>(t)];
      const TimeStamp& then = (*time)[static_cast<std::size_t>(t - l)];
      if (then.day != now.day || now.beep - then.beep != l) {
        ok = false;
        break;
      }
    }
    if (ok) out.kept_rows.push_back(t);
  }
  const int m = static_cast<int>(out.kept_rows.size());
  if (m < 20)
    throw DataError("only " + std::to_string(m) +
                    " usable lagged rows; need at least 20");

  int cols = 0;
  for (std::size_t li = 0; li < lags.size(); ++li)
    for (int j = 0; j < d.p(); ++j)
      cols += d.var(j).kind == VarKind::continuous ? 1 : d.var(j).levels;

  out.X.resize(m, cols);
  out.Y.resize(m, d.p());
  out.terms.reserve(static_cast<std::size_t>(cols));

  int c = 0;
  for (const int l : lags) {
    for (int j = 0; j < d.p(); ++j) {
      if (d.var(j).kind == VarKind::continuous) {
        for (int r = 0; r < m; ++r)
          out.X(r, c) = d.value(out.kept_rows[static_cast<std::size_t>(r)] - l, j);
        out.terms.push_back(PredictorTerm{j, 0, l});
        ++c;
      } else {
        for (int k = 1; k <= d.var(j).levels; ++k) {
          for (int r = 0; r < m; ++r)
            out.X(r, c) =
                d.code(out.kept_rows[static_cast<std::size_t>(r)] - l, j) == k ? 1.0 : 0.0;
          out.terms.push_back(PredictorTerm{j, k, l});
          ++c;
        }
      }
    }
  }
  for (int r = 0; r < m; ++r)
    out.Y.row(r) = d.values().row(out.kept_rows[static_cast<std::size_t>(r)]);
  return out;
}

namespace {

NodeModel fit_response(const LaggedDesign& design, const Dataset& d, int node,
                       const MvarOptions& options) {
  NodeModel m;
  m.node = node;
  m.terms = design.terms;
  const auto& v = d.var(node);
  m.family = v.kind == VarKind::continuous ? Family::gaussian : Family::multinomial;
  m.levels = v.levels;
  const Eigen::VectorXd y = design.Y.col(node);

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

}  // namespace

VARModel fit_mvar(const Dataset& d, const std::optional<TimeIndex>& time,
                  const MvarOptions& options) {
  if (!d.centered()) throw DataError("fit_mvar requires a centered dataset");
  if (options.fixed_lambda && *options.fixed_lambda < 0)
    throw DataError("fixed lambda must be non-negative");
  const LaggedDesign design = build_lagged_design(d, options.lags, time);

  VARModel model;
  model.spec = d.spec();
  model.lags = options.lags;
  model.seed = options.seed;
  model.centering_means = d.centering_means();
  model.scales = d.scales();
  model.nodes.resize(static_cast<std::size_t>(d.p()));
  model.train_marginals.resize(static_cast<std::size_t>(d.p()));
  model.per_node_lambda.assign(static_cast<std::size_t>(d.p()), 0.0);
  model.intercepts = Eigen::VectorXd::Zero(d.p());
  model.residual_sigmas = Eigen::VectorXd::Zero(d.p());

  parallel_for(d.p(), options.threads, [&](int node) {
    NodeModel m = fit_response(design, d, node, options);
    model.per_node_lambda[static_cast<std::size_t>(node)] = m.lambda;
    if (m.family == Family::gaussian) {
      model.intercepts[node] = m.coef.intercepts[0];
      model.residual_sigmas[node] = m.coef.residual_sigma.value_or(0.0);
    }
    if (d.var(node).kind == VarKind::categorical)
      model.train_marginals[static_cast<std::size_t>(node)] =
          marginal_distribution(design.Y.col(node), d.var(node).levels);
    model.nodes[static_cast<std::size_t>(node)] = std::move(m);
  });

  // Aggregate the per-term coefficients into the lag-major network array.
  model.coefficients.assign(options.lags.size(),
                            Eigen::MatrixXd::Zero(d.p(), d.p()));
  for (int i = 0; i < d.p(); ++i) {
    const NodeModel& m = model.nodes[static_cast<std::size_t>(i)];
    for (std::size_t li = 0; li < options.lags.size(); ++li) {
      const int lag = options.lags[li];
      for (int j = 0; j < d.p(); ++j) {
        const bool raw_signed = d.var(i).kind == VarKind::continuous &&
                                d.var(j).kind == VarKind::continuous;
        double abs_sum = 0.0;
        double raw = 0.0;
        int count = 0;
        for (std::size_t t = 0; t < m.terms.size(); ++t) {
          if (m.terms[t].source != j || m.terms[t].lag != lag) continue;
          for (int k = 0; k < m.coef.betas.cols(); ++k) {
            const double b = m.coef.betas(static_cast<Eigen::Index>(t), k);
            abs_sum += std::abs(b);
            raw = b;
            ++count;
          }
        }
        if (count == 0) continue;
        model.coefficients[li](i, j) = raw_signed ? raw : abs_sum / count;
      }
    }
  }
  return model;
}

}  // namespace netpred
