#include "netpred/cv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netpred/errors.hpp"
#include "netpred/rng.hpp"

namespace netpred {

namespace {

void check_config(const CvConfig& config, int n) {
  if (config.folds < 2) throw DataError("cross-validation needs at least 2 folds");
  if (config.folds > n)
    throw DataError("fold count " + std::to_string(config.folds) + " exceeds row count " +
                    std::to_string(n));
  if (config.n_lambda < 1) throw DataError("path needs at least one lambda");
  if (!(config.lambda_min_ratio > 0.0 && config.lambda_min_ratio < 1.0))
    throw DataError("lambda_min_ratio must lie in (0, 1)");
}

std::vector<double> path_from_max(double lambda_max, const CvConfig& config) {
  std::vector<double> path(static_cast<std::size_t>(config.n_lambda));
  if (config.n_lambda == 1) {
    path[0] = lambda_max;
    return path;
  }
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(lambda_max * config.lambda_min_ratio);
  for (int i = 0; i < config.n_lambda; ++i)
    path[static_cast<std::size_t>(i)] =
        std::exp(log_max + (log_min - log_max) * i / (config.n_lambda - 1));
  path[0] = lambda_max;  // anchor exactly
  return path;
}

std::vector<int> plain_folds(int n, int folds, std::uint64_t seed) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(order, rng);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) fold_of[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i % folds;
  return fold_of;
}

std::vector<int> stratified_folds(const Eigen::VectorXd& y, int levels, int folds,
                                  std::uint64_t seed) {
  const int n = static_cast<int>(y.size());
  Rng rng(seed);
  std::vector<int> fold_of(static_cast<std::size_t>(n), -1);
  int next_fold = 0;
  for (int k = 1; k <= levels; ++k) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (static_cast<int>(y[i]) == k) members.push_back(i);
    shuffle(members, rng);
    for (const int i : members) {
      fold_of[static_cast<std::size_t>(i)] = next_fold;
      next_fold = (next_fold + 1) % folds;
    }
  }
  return fold_of;
}

// Every training complement must contain every category.
bool folds_cover_categories(const std::vector<int>& fold_of, const Eigen::VectorXd& y,
                            int levels, int folds) {
  // count[k][f]: members of category k in fold f
  std::vector<std::vector<int>> count(static_cast<std::size_t>(levels),
                                      std::vector<int>(static_cast<std::size_t>(folds), 0));
  for (int i = 0; i < y.size(); ++i)
    ++count[static_cast<std::size_t>(static_cast<int>(y[i]) - 1)]
           [static_cast<std::size_t>(fold_of[static_cast<std::size_t>(i)])];
  for (int k = 0; k < levels; ++k) {
    int total = 0;
    for (int f = 0; f < folds; ++f) total += count[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)];
    for (int f = 0; f < folds; ++f)
      if (total - count[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)] == 0) return false;
  }
  return true;
}

}  // namespace

std::vector<double> lambda_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                Family family, int levels, const CvConfig& config) {
  check_config(config, static_cast<int>(X.rows()));
  double lambda_max = 0.0;
  if (family == Family::gaussian) {
    GaussianCoordinateDescent solver(X, y);
    lambda_max = solver.lambda_max();
  } else {
    MultinomialCoordinateDescent solver(X, y, levels);
    // Tiny relative headroom so that solving at path[0] stays exactly null
    // despite the intercept-block rounding drift across class updates.
    lambda_max = solver.lambda_max() * (1.0 + 1e-12);
  }
  if (!(lambda_max > 0.0)) lambda_max = 1e-12;  // degenerate orthogonal response
  return path_from_max(lambda_max, config);
}

std::vector<int> assign_folds(const Eigen::VectorXd& y, Family family, int levels,
                              int folds, std::uint64_t seed) {
  const int n = static_cast<int>(y.size());
  if (family != Family::multinomial) return plain_folds(n, folds, seed);

  std::vector<int> fold_of = stratified_folds(y, levels, folds, seed);
  if (!folds_cover_categories(fold_of, y, levels, folds)) {
    fold_of = stratified_folds(y, levels, folds, Rng::derive(seed, 0x5eed));
    if (!folds_cover_categories(fold_of, y, levels, folds))
      throw DataError("a cross-validation fold lost a category; too few observations");
  }
  return fold_of;
}

CvResult select_lambda(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Family family,
                       int levels, const CvConfig& config) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  check_config(config, n);

  CvResult result;
  result.lambdas = lambda_path(X, y, family, levels, config);
  const int L = static_cast<int>(result.lambdas.size());
  result.mean_loss.assign(static_cast<std::size_t>(L), 0.0);

  const std::vector<int> fold_of = assign_folds(y, family, levels, config.folds, config.seed);

  for (int f = 0; f < config.folds; ++f) {
    int n_test = 0;
    for (int i = 0; i < n; ++i) n_test += fold_of[static_cast<std::size_t>(i)] == f;
    const int n_train = n - n_test;
    Eigen::MatrixXd X_train(n_train, d), X_test(n_test, d);
    Eigen::VectorXd y_train(n_train), y_test(n_test);
    for (int i = 0, a = 0, b = 0; i < n; ++i) {
      if (fold_of[static_cast<std::size_t>(i)] == f) {
        X_test.row(b) = X.row(i);
        y_test[b++] = y[i];
      } else {
        X_train.row(a) = X.row(i);
        y_train[a++] = y[i];
      }
    }

    if (family == Family::gaussian) {
      GaussianCoordinateDescent solver(X_train, y_train);
      for (int l = 0; l < L; ++l) {
        const CoefficientSet coef = solver.solve(result.lambdas[static_cast<std::size_t>(l)]);
        const Eigen::VectorXd pred =
            (X_test * coef.betas.col(0)).array() + coef.intercepts[0];
        result.mean_loss[static_cast<std::size_t>(l)] += (pred - y_test).squaredNorm();
      }
    } else {
      MultinomialCoordinateDescent solver(X_train, y_train, levels);
      for (int l = 0; l < L; ++l) {
        const CoefficientSet coef = solver.solve(result.lambdas[static_cast<std::size_t>(l)]);
        const Eigen::MatrixXd P = multinomial_probabilities(X_test, coef);
        double loss = 0.0;
        for (int i = 0; i < n_test; ++i) {
          const int k = static_cast<int>(y_test[i]) - 1;
          loss -= std::log(std::max(P(i, k), 1e-12));
        }
        result.mean_loss[static_cast<std::size_t>(l)] += loss;
      }
    }
  }

  for (auto& loss : result.mean_loss) loss /= n;

  int best = 0;
  for (int l = 1; l < L; ++l)
    if (result.mean_loss[static_cast<std::size_t>(l)] < result.mean_loss[static_cast<std::size_t>(best)])
      best = l;  // strict <: ties resolve to the larger lambda
  result.best_index = best;
  result.best_lambda = result.lambdas[static_cast<std::size_t>(best)];
  return result;
}

}  // namespace netpred
