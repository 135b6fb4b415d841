#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "netpred/data.hpp"

namespace netpred {

// All samplers are pure functions of (parameters, n, seed); see rng.hpp for
// the generator specification.

// n draws from the zero-mean Gaussian with the given precision matrix,
// via Cholesky factorization. Throws on non-SPD input.
Dataset sample_ggm(const Eigen::MatrixXd& precision, int n, std::uint64_t seed);

// Gibbs sampler for the pairwise binary model over spins s in {-1,+1}^p with
// P(s) proportional to exp(sum_i thresholds_i s_i + sum_{i<j} weights_ij s_i s_j).
// States map to category codes {1, 2} (spin -1 -> 1, spin +1 -> 2).
Dataset sample_ising_gibbs(const Eigen::MatrixXd& weights, const Eigen::VectorXd& thresholds,
                           int n, int burn_in, int thin, std::uint64_t seed);
inline Dataset sample_ising_gibbs(const Eigen::MatrixXd& weights,
                                  const Eigen::VectorXd& thresholds, int n,
                                  std::uint64_t seed) {
  return sample_ising_gibbs(weights, thresholds, n, 1000, 10, seed);
}

// x_t = B x_{t-1} + eps_t with diagonal Gaussian noise; 500 burn-in steps
// are discarded. Requires spectral radius of B below 1.
Dataset simulate_var(const Eigen::MatrixXd& coefficients, const Eigen::VectorXd& noise_sds,
                     int n, std::uint64_t seed);

// Population nodewise explained variance under a Gaussian graphical model:
// R2_j = 1 - (1/precision_jj) / covariance_jj.
Eigen::VectorXd population_r2(const Eigen::MatrixXd& precision);

// Spectral radius of a square real matrix (used for the VAR stability check).
double spectral_radius(const Eigen::MatrixXd& m);

}  // namespace netpred
