#pragma once

#include <vector>

#include "spd_geometry.hpp"

namespace rpls {

struct FrechetConfig {
  double tolerance = 1e-6;   // on the Riemannian norm of the mean log
  double initial_step = 1.0;
  int max_iterations = 200;
};

struct FrechetResult {
  SpdMatrix mean;
  double final_gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Fréchet mean of SPD samples by gradient descent with an adaptive step:
// starting from the first sample, move along v = (tau/n) sum_i Log_mu(y_i),
// halving tau whenever a proposed step is larger than the previously accepted
// one. Convergence is declared when the mean-log norm (1/n)||sum Log_mu(y_i)||
// drops below the tolerance, so a converged result is first-order stationary.
// Non-convergence is reported through the flag, not an exception, so batch
// loops can decide what to do with the last iterate.
FrechetResult frechet_mean(const std::vector<SpdMatrix>& samples, const FrechetConfig& cfg = {});

// Value of the minimized objective (1/n) sum_i d(y_i, mean)^2.
double frechet_variance(const std::vector<SpdMatrix>& samples, const SpdMatrix& mean);

}  // namespace rpls
