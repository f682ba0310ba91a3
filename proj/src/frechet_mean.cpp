#include "frechet_mean.hpp"

#include <cmath>
#include <limits>

namespace rpls {

namespace {

void validate(const std::vector<SpdMatrix>& samples, const FrechetConfig& cfg) {
  if (samples.empty()) fail(ErrorCode::EmptyInput, "frechet_mean: no samples");
  const int dim = samples.front().dim();
  for (const SpdMatrix& s : samples)
    if (s.dim() != dim) fail(ErrorCode::InvalidInput, "frechet_mean: samples have mixed dimensions");
  if (!(cfg.tolerance > 0.0)) fail(ErrorCode::InvalidInput, "frechet_mean: tolerance must be positive");
  if (!(cfg.initial_step > 0.0 && cfg.initial_step <= 2.0))
    fail(ErrorCode::InvalidInput, "frechet_mean: step size must lie in (0, 2]");
  if (cfg.max_iterations < 1) fail(ErrorCode::InvalidInput, "frechet_mean: max_iterations must be >= 1");
}

}  // namespace

FrechetResult frechet_mean(const std::vector<SpdMatrix>& samples, const FrechetConfig& cfg) {
  validate(samples, cfg);
  const int n = static_cast<int>(samples.size());
  const int dim = samples.front().dim();

  SpdMatrix mean = samples.front();
  double tau = cfg.initial_step;
  double prev_accepted = std::numeric_limits<double>::infinity();

  // One whitening of the current iterate serves every per-sample log; the sum
  // runs in sample order so results do not depend on any parallel schedule.
  auto mean_log_whitened = [&](const SpdMatrix& mu) {
    const Matrix inv_sqrt = mat_fn(mu.matrix(), MatrixFn::InvSqrt);
    Matrix acc = Matrix::Zero(dim, dim);
    for (const SpdMatrix& y : samples) {
      const Matrix whitened = inv_sqrt * y.matrix() * inv_sqrt;
      acc += mat_fn(Matrix(0.5 * (whitened + whitened.transpose())), MatrixFn::Log);
    }
    return Matrix((acc / static_cast<double>(n)).eval());
  };

  Matrix grad = mean_log_whitened(mean);
  // In whitened coordinates the affine-invariant norm is the Frobenius norm.
  double grad_norm = grad.norm();
  int iterations = 0;

  while (grad_norm > cfg.tolerance && iterations < cfg.max_iterations) {
    ++iterations;
    const double step_norm = tau * grad_norm;
    if (step_norm > prev_accepted) {
      tau *= 0.5;
      continue;
    }
    const Matrix sqrt = mat_fn(mean.matrix(), MatrixFn::Sqrt);
    const Matrix step = mat_fn(Matrix(tau * grad), MatrixFn::Exp);
    const Matrix moved = sqrt * step * sqrt;
    mean = SpdMatrix(0.5 * (moved + moved.transpose()));
    prev_accepted = step_norm;
    grad = mean_log_whitened(mean);
    grad_norm = grad.norm();
  }

  FrechetResult result{mean, grad_norm, iterations, grad_norm <= cfg.tolerance};
  return result;
}

double frechet_variance(const std::vector<SpdMatrix>& samples, const SpdMatrix& mean) {
  if (samples.empty()) fail(ErrorCode::EmptyInput, "frechet_variance: no samples");
  double sum = 0.0;
  for (const SpdMatrix& s : samples) {
    if (s.dim() != mean.dim()) fail(ErrorCode::InvalidInput, "frechet_variance: dimension mismatch");
    const double d = distance(s, mean);
    sum += d * d;
  }
  return sum / static_cast<double>(samples.size());
}

}  // namespace rpls
