#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "helpers.hpp"
#include "netpred/errors.hpp"
#include "netpred/mgm.hpp"
#include "netpred/rng.hpp"
#include "netpred/sampler.hpp"

using namespace netpred;

namespace {

Dataset centered_ggm(const Eigen::MatrixXd& precision, int n, std::uint64_t seed) {
  return center_continuous(sample_ggm(precision, n, seed));
}

MgmOptions quick_options(std::uint64_t seed) {
  MgmOptions options;
  options.seed = seed;
  options.cv.seed = seed;
  options.cv.n_lambda = 30;
  return options;
}

// Minimal hand-built gaussian node model over continuous variables.
NodeModel toy_node(int node, int p, const std::vector<std::pair<int, double>>& coefs) {
  NodeModel m;
  m.node = node;
  m.family = Family::gaussian;
  m.levels = 1;
  m.coef.intercepts = Eigen::VectorXd::Zero(1);
  m.coef.betas = Eigen::MatrixXd::Zero(p - 1, 1);
  for (int j = 0; j < p; ++j)
    if (j != node) m.terms.push_back(PredictorTerm{j, 0, 0});
  for (const auto& [source, value] : coefs)
    for (std::size_t t = 0; t < m.terms.size(); ++t)
      if (m.terms[t].source == source) m.coef.betas(static_cast<Eigen::Index>(t), 0) = value;
  return m;
}

}  // namespace

TEST_CASE("combine_neighborhoods applies the OR and AND rules") {
  const std::vector<std::vector<int>> nb{{1}, {}};
  const auto or_adj = combine_neighborhoods(nb, EdgeRule::OR);
  CHECK(or_adj(0, 1));
  CHECK(or_adj(1, 0));
  const auto and_adj = combine_neighborhoods(nb, EdgeRule::AND);
  CHECK_FALSE(and_adj(0, 1));
  CHECK_FALSE(and_adj(1, 0));
}

TEST_CASE("AND adjacency is a subset of OR adjacency over all 3-node configurations") {
  // each node's neighbor set ranges over subsets of the other two nodes
  const std::vector<std::vector<int>> options{{}, {0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}};
  auto subsets_for = [&](int self) {
    std::vector<std::vector<int>> out;
    for (const auto& s : options) {
      bool ok = true;
      for (const int v : s) ok = ok && v != self;
      if (ok) out.push_back(s);
    }
    return out;
  };
  const auto s0 = subsets_for(0), s1 = subsets_for(1), s2 = subsets_for(2);
  for (const auto& a : s0)
    for (const auto& b : s1)
      for (const auto& c : s2) {
        const std::vector<std::vector<int>> nb{a, b, c};
        const auto or_adj = combine_neighborhoods(nb, EdgeRule::OR);
        const auto and_adj = combine_neighborhoods(nb, EdgeRule::AND);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            if (and_adj(i, j)) CHECK(or_adj(i, j));
            CHECK(or_adj(i, j) == or_adj(j, i));
            CHECK_FALSE(or_adj(i, i));
          }
      }
}

TEST_CASE("edge weights average the cross-regression coefficients") {
  const std::vector<VariableSpec> spec{{"x", VarKind::continuous, 1},
                                       {"y", VarKind::continuous, 1}};
  std::vector<NodeModel> models{toy_node(0, 2, {{1, 0.4}}), toy_node(1, 2, {{0, 0.2}})};
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adj(2, 2);
  adj.setConstant(true);
  adj(0, 0) = adj(1, 1) = false;
  Eigen::MatrixXd wadj;
  Eigen::MatrixXi signs;
  edge_weights(models, adj, spec, false, wadj, signs);
  CHECK(wadj(0, 1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(wadj(1, 0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(signs(0, 1) == 1);

  // conflicting signs give an undefined edge sign
  models[1] = toy_node(1, 2, {{0, -0.2}});
  edge_weights(models, adj, spec, false, wadj, signs);
  CHECK(wadj(0, 1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(signs(0, 1) == 0);

  // an edge whose collected coefficients are all zero is dropped
  models[0] = toy_node(0, 2, {});
  models[1] = toy_node(1, 2, {});
  edge_weights(models, adj, spec, false, wadj, signs);
  CHECK(wadj(0, 1) == 0.0);
}

TEST_CASE("continuous-categorical edges pool the category block without a sign") {
  const std::vector<VariableSpec> spec{{"x", VarKind::continuous, 1},
                                       {"k", VarKind::categorical, 3}};
  // x's regression sees 3 indicator columns of k with coefficients {0.3,-0.3,0}
  NodeModel mx;
  mx.node = 0;
  mx.family = Family::gaussian;
  mx.levels = 1;
  mx.terms = {PredictorTerm{1, 1, 0}, PredictorTerm{1, 2, 0}, PredictorTerm{1, 3, 0}};
  mx.coef.intercepts = Eigen::VectorXd::Zero(1);
  mx.coef.betas.resize(3, 1);
  mx.coef.betas << 0.3, -0.3, 0.0;
  // k's multinomial regression on x contributes an all-zero 1x3 block
  NodeModel mk;
  mk.node = 1;
  mk.family = Family::multinomial;
  mk.levels = 3;
  mk.terms = {PredictorTerm{0, 0, 0}};
  mk.coef.intercepts = Eigen::VectorXd::Zero(3);
  mk.coef.betas = Eigen::MatrixXd::Zero(1, 3);

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adj(2, 2);
  adj.setConstant(true);
  adj(0, 0) = adj(1, 1) = false;
  Eigen::MatrixXd wadj;
  Eigen::MatrixXi signs;
  edge_weights({mx, mk}, adj, spec, true, wadj, signs);
  CHECK(wadj(0, 1) == doctest::Approx(0.6 / 6.0).epsilon(1e-15));
  CHECK(signs(0, 1) == 0);  // K = 3 never carries a sign
}

TEST_CASE("fit_mgm validates its preconditions") {
  const Eigen::MatrixXd prec = Eigen::MatrixXd::Identity(2, 2);
  const Dataset raw = sample_ggm(prec, 50, 1);
  CHECK_THROWS_AS(fit_mgm(raw, quick_options(1)), DataError);  // uncentered
  const Dataset tiny = center_continuous(sample_ggm(prec, 8, 1));
  CHECK_THROWS_AS(fit_mgm(tiny, quick_options(1)), DataError);  // n <= 10
}

TEST_CASE("independent columns produce an empty network (median over 20 seeds)") {
  std::vector<double> edges;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset d = centered_ggm(Eigen::MatrixXd::Identity(2, 2), 500, 100 + seed);
    const PairwiseMGM model = fit_mgm(d, quick_options(seed));
    edges.push_back(model.wadj(0, 1) > 0 ? 1.0 : 0.0);
  }
  CHECK(testutil::median(edges) == 0.0);
}

TEST_CASE("a correlation-0.8 pair yields one positive edge") {
  // covariance [[1,.8],[.8,1]] -> precision (1/.36) [[1,-.8],[-.8,1]]
  Eigen::MatrixXd prec(2, 2);
  prec << 1.0, -0.8, -0.8, 1.0;
  prec /= 0.36;
  const Dataset d = centered_ggm(prec, 500, 31);
  const PairwiseMGM model = fit_mgm(d, quick_options(7));
  CHECK(model.wadj(0, 1) > 0.1);
  CHECK(model.signs(0, 1) == 1);
  CHECK(model.wadj(0, 0) == 0.0);
  CHECK(model.wadj(0, 1) == model.wadj(1, 0));
}

TEST_CASE("recovered signs match the population partial correlations") {
  // chain with alternating partial correlation signs
  Eigen::MatrixXd prec = Eigen::MatrixXd::Identity(5, 5);
  for (int i = 0; i + 1 < 5; ++i) {
    const double rho = i % 2 == 0 ? 0.35 : -0.35;
    prec(i, i + 1) = prec(i + 1, i) = -rho;  // partial corr = -prec_ij
  }
  const Dataset d = centered_ggm(prec, 1500, 41);
  const PairwiseMGM model = fit_mgm(d, quick_options(11));
  for (int i = 0; i + 1 < 5; ++i) {
    REQUIRE(model.wadj(i, i + 1) > 0.0);
    CHECK(model.signs(i, i + 1) == (i % 2 == 0 ? 1 : -1));
  }
}

TEST_CASE("AND-rule edges are a subset of OR-rule edges on identical node models") {
  const Dataset d = centered_ggm(testutil::chain_precision(5, 0.3), 400, 51);
  MgmOptions options = quick_options(3);
  options.rule = EdgeRule::OR;
  const PairwiseMGM or_model = fit_mgm(d, options);

  std::vector<std::vector<int>> neighborhoods;
  for (const auto& node : or_model.nodes) neighborhoods.push_back(neighborhood(node));
  const auto and_adj = combine_neighborhoods(neighborhoods, EdgeRule::AND);
  Eigen::MatrixXd and_wadj;
  Eigen::MatrixXi and_signs;
  edge_weights(or_model.nodes, and_adj, or_model.spec, false, and_wadj, and_signs);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      if (and_wadj(i, j) > 0) CHECK(or_model.wadj(i, j) > 0);
}

TEST_CASE("a forced penalty above lambda_max leaves every node disconnected") {
  const Dataset d = centered_ggm(testutil::chain_precision(4, 0.3), 200, 61);
  MgmOptions options = quick_options(5);
  options.fixed_lambda = 100.0;
  const PairwiseMGM model = fit_mgm(d, options);
  CHECK(model.wadj.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& node : model.nodes) CHECK(neighborhood(node).empty());
}

TEST_CASE("a constant column joins no edges and keeps an intercept-only model") {
  Rng rng(71);
  Eigen::MatrixXd values(100, 3);
  for (int i = 0; i < 100; ++i) {
    values(i, 0) = rng.normal();
    values(i, 1) = values(i, 0) * 0.9 + 0.3 * rng.normal();
    values(i, 2) = 2.0;  // constant categorical
  }
  const std::vector<VariableSpec> spec{{"a", VarKind::continuous, 1},
                                       {"b", VarKind::continuous, 1},
                                       {"c", VarKind::categorical, 2}};
  const Dataset d = center_continuous(Dataset(spec, values));
  const PairwiseMGM model = fit_mgm(d, quick_options(1));
  CHECK(model.wadj.row(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(model.wadj(0, 1) > 0.0);
  CHECK(model.nodes[2].coef.betas.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("binary-sign mode recovers the direction of a continuous-binary link") {
  Rng rng(81);
  const int n = 600;
  Eigen::MatrixXd values(n, 2);
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    values(i, 0) = x;
    values(i, 1) = (x + 0.8 * rng.normal()) > 0 ? 2.0 : 1.0;
  }
  const std::vector<VariableSpec> spec{{"x", VarKind::continuous, 1},
                                       {"b", VarKind::categorical, 2}};
  const Dataset d = center_continuous(Dataset(spec, values));

  MgmOptions with_sign = quick_options(9);
  with_sign.binary_sign = true;
  const PairwiseMGM signed_model = fit_mgm(d, with_sign);
  REQUIRE(signed_model.wadj(0, 1) > 0.0);
  CHECK(signed_model.signs(0, 1) == 1);

  MgmOptions without_sign = quick_options(9);
  const PairwiseMGM unsigned_model = fit_mgm(d, without_sign);
  REQUIRE(unsigned_model.wadj(0, 1) > 0.0);
  CHECK(unsigned_model.signs(0, 1) == 0);
}

TEST_CASE("a 12-variable mixed fit returns a connected mixed network") {
  // 11 continuous variables on a chain plus one binary node tied to node 0
  Rng rng(91);
  const int n = 400, p_cont = 11;
  const Dataset ggm = sample_ggm(testutil::chain_precision(p_cont, 0.35), n, 92);
  Eigen::MatrixXd values(n, p_cont + 1);
  values.leftCols(p_cont) = ggm.values();
  for (int i = 0; i < n; ++i)
    values(i, p_cont) = (ggm.value(i, 0) + rng.normal()) > 0 ? 2.0 : 1.0;
  std::vector<VariableSpec> spec = ggm.spec();
  spec.push_back({"loss", VarKind::categorical, 2});
  const Dataset d = center_continuous(Dataset(spec, values));

  MgmOptions options = quick_options(13);
  options.binary_sign = true;
  const PairwiseMGM model = fit_mgm(d, options);

  CHECK(testutil::bitwise_equal(model.wadj, model.wadj.transpose()));
  CHECK(model.wadj.diagonal().cwiseAbs().maxCoeff() == 0.0);
  int chain_hits = 0;
  for (int i = 0; i + 1 < p_cont; ++i) chain_hits += model.wadj(i, i + 1) > 0;
  CHECK(chain_hits >= 8);
  CHECK(model.wadj(0, p_cont) > 0.0);  // binary node attached to node 0
  for (int i = 0; i < model.wadj.rows(); ++i)
    for (int j = 0; j < model.wadj.cols(); ++j)
      if (model.signs(i, j) != 0) CHECK(model.wadj(i, j) > 0.0);
}
