#pragma once

#include <cstdint>
#include <vector>

#include "nipals.hpp"

namespace rpls {

// Redundancy Rd(Y, t) = (1/q) sum_i cor(Y_i, t)^2: the proportion of response
// variance the score explains. Zero-variance columns (or a zero-variance
// score) contribute a correlation of 0; the count of such columns is reported
// through zero_variance_count when given.
double redundancy(const Matrix& y, const Vector& score, int* zero_variance_count = nullptr);

// VIP_j = sqrt( p / Rd(Y, T) * sum_k Rd(Y, t_k) w_jk^2 ), so that
// sum_j VIP_j^2 = p whenever the weights have unit norm.
Vector vip_scores(const PlsFit& fit, const Matrix& y);

// Benjamini-Hochberg step-up adjustment mapped back to input order.
Vector fdr_adjust(const Vector& p_values);

struct VipConfig {
  int permutations = 200;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  // Report (count + 1) / (H - failed + 1) instead of the plain ratio.
  bool smoothed_p_values = false;
  int workers = 1;
};

struct VipReport {
  Vector vip;
  Vector p_values;
  Vector q_values;
  std::vector<bool> significant;
  std::vector<bool> diagonal_mask;
  std::vector<int> failed_permutations;  // per predictor, excluded from the denominator
  int permutations = 0;
  double alpha = 0.05;

  int significant_count() const;
};

// Permutation inference on the linearised coordinates: for each unmasked
// predictor j, permute its column H times, refit, and count permuted VIPs
// strictly exceeding the observed one. Masked (diagonal) coordinates get
// p = 1 without refitting. Each (j, h) task derives its own seed from
// (seed, j, h), so results are identical under any worker count.
VipReport vip_permutation_test(const Matrix& x_lin, const Matrix& y, int n_components,
                               const NipalsConfig& nipals_cfg,
                               const std::vector<bool>& diagonal_mask, const VipConfig& cfg);

}  // namespace rpls
