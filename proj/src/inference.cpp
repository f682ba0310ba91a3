#include "inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rng.hpp"
#include "thread_pool.hpp"

namespace rpls {

namespace {

constexpr double kVarianceTol = 1e-24;  // on the centered sum of squares

}  // namespace

double redundancy(const Matrix& y, const Vector& score, int* zero_variance_count) {
  const Eigen::Index n = y.rows();
  if (n < 3) fail(ErrorCode::InvalidInput, "redundancy: need at least three observations");
  if (score.size() != n) fail(ErrorCode::InvalidInput, "redundancy: score length mismatch");

  const Vector t_centered = score.array() - score.mean();
  const double t_ss = t_centered.squaredNorm();
  int zero_count = 0;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    const Vector yj = y.col(j).array() - y.col(j).mean();
    const double y_ss = yj.squaredNorm();
    if (t_ss <= kVarianceTol || y_ss <= kVarianceTol) {
      ++zero_count;
      continue;
    }
    const double c = yj.dot(t_centered) / std::sqrt(y_ss * t_ss);
    acc += c * c;
  }
  if (zero_variance_count) *zero_variance_count = zero_count;
  return acc / static_cast<double>(y.cols());
}

Vector vip_scores(const PlsFit& fit, const Matrix& y) {
  if (fit.n_components < 1) fail(ErrorCode::InvalidInput, "vip_scores: unfitted model");
  if (y.rows() != fit.scores_x.rows()) fail(ErrorCode::InvalidInput, "vip_scores: row count mismatch");
  const Eigen::Index p = fit.weights_x.rows();
  const int k_total = fit.n_components;

  Vector rd(k_total);
  for (int k = 0; k < k_total; ++k) rd[k] = redundancy(y, fit.scores_x.col(k));
  const double rd_total = rd.sum();
  if (rd_total <= 0.0)
    fail(ErrorCode::DegenerateModel, "vip_scores: scores explain no response variance");

  Vector vip(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double acc = 0.0;
    for (int k = 0; k < k_total; ++k) {
      const double w = fit.weights_x(j, k);
      acc += rd[k] * w * w;
    }
    vip[j] = std::sqrt(static_cast<double>(p) / rd_total * acc);
  }
  return vip;
}

Vector fdr_adjust(const Vector& p_values) {
  const Eigen::Index m = p_values.size();
  if (m == 0) fail(ErrorCode::EmptyInput, "fdr_adjust: no p-values");
  for (Eigen::Index i = 0; i < m; ++i)
    if (!(p_values[i] >= 0.0 && p_values[i] <= 1.0))
      fail(ErrorCode::InvalidInput, "fdr_adjust: p-values must lie in [0, 1]");

  std::vector<Eigen::Index> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return p_values[a] < p_values[b]; });

  Vector q(m);
  double running_min = 1.0;
  for (Eigen::Index rank = m - 1; rank >= 0; --rank) {
    const Eigen::Index idx = order[rank];
    const double scaled =
        p_values[idx] * static_cast<double>(m) / static_cast<double>(rank + 1);
    running_min = std::min(running_min, std::min(1.0, scaled));
    q[idx] = running_min;
  }
  return q;
}

int VipReport::significant_count() const {
  int count = 0;
  for (bool s : significant) count += s ? 1 : 0;
  return count;
}

VipReport vip_permutation_test(const Matrix& x_lin, const Matrix& y, int n_components,
                               const NipalsConfig& nipals_cfg,
                               const std::vector<bool>& diagonal_mask, const VipConfig& cfg) {
  const Eigen::Index n = x_lin.rows();
  const Eigen::Index p = x_lin.cols();
  if (cfg.permutations < 1) fail(ErrorCode::InvalidInput, "vip_permutation_test: need H >= 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    fail(ErrorCode::InvalidInput, "vip_permutation_test: alpha must lie in (0, 1)");
  if (!diagonal_mask.empty() && static_cast<Eigen::Index>(diagonal_mask.size()) != p)
    fail(ErrorCode::InvalidInput, "vip_permutation_test: mask length mismatch");

  const PlsFit fit = nipals_fit(x_lin, y, n_components, nipals_cfg);
  VipReport report;
  report.vip = vip_scores(fit, y);
  report.permutations = cfg.permutations;
  report.alpha = cfg.alpha;
  report.diagonal_mask =
      diagonal_mask.empty() ? std::vector<bool>(p, false) : diagonal_mask;

  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < p; ++j)
    if (!report.diagonal_mask[j]) active.push_back(j);

  const int h_total = cfg.permutations;
  // outcome per (active predictor, permutation): 1 = exceeded, 0 = not, 2 = refit failed
  std::vector<std::uint8_t> outcomes(active.size() * static_cast<std::size_t>(h_total), 0);

  parallel_for(outcomes.size(), cfg.workers, [&](std::size_t task) {
    const Eigen::Index j = active[task / h_total];
    const int h = static_cast<int>(task % h_total);
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(h)));
    const std::vector<int> perm = random_permutation(static_cast<int>(n), rng);
    Matrix x_perm = x_lin;
    for (Eigen::Index i = 0; i < n; ++i) x_perm(i, j) = x_lin(perm[i], j);
    try {
      const PlsFit refit = nipals_fit(x_perm, y, n_components, nipals_cfg);
      const Vector vip_perm = vip_scores(refit, y);
      outcomes[task] = vip_perm[j] > report.vip[j] ? 1 : 0;
    } catch (const Error&) {
      outcomes[task] = 2;
    }
  });

  report.p_values = Vector::Ones(p);
  report.failed_permutations.assign(p, 0);
  for (std::size_t a = 0; a < active.size(); ++a) {
    const Eigen::Index j = active[a];
    int exceed = 0;
    int failed = 0;
    for (int h = 0; h < h_total; ++h) {
      const std::uint8_t o = outcomes[a * static_cast<std::size_t>(h_total) + h];
      if (o == 1) ++exceed;
      if (o == 2) ++failed;
    }
    report.failed_permutations[j] = failed;
    const int valid = h_total - failed;
    if (valid <= 0) {
      report.p_values[j] = 1.0;
      continue;
    }
    report.p_values[j] = cfg.smoothed_p_values
                             ? (exceed + 1.0) / (valid + 1.0)
                             : static_cast<double>(exceed) / static_cast<double>(valid);
  }

  report.q_values = fdr_adjust(report.p_values);
  report.significant.assign(p, false);
  for (Eigen::Index j = 0; j < p; ++j)
    report.significant[j] = !report.diagonal_mask[j] && report.q_values[j] <= cfg.alpha;
  return report;
}

}  // namespace rpls
