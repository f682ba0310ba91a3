#include "nipals.hpp"

#include <cmath>
#include <string>

namespace rpls {

namespace {

// A residual block is treated as exhausted when its norm falls this far below
// the starting scale of the data.
constexpr double kResidualRelTol = 1e-12;

int pick_init_column(const Matrix& y_residual, double y_scale) {
  const double tiny = kResidualRelTol * std::max(1.0, y_scale);
  if (y_residual.col(0).norm() > tiny) return 0;
  int best = -1;
  double best_norm = tiny;
  for (Eigen::Index j = 1; j < y_residual.cols(); ++j) {
    const double nj = y_residual.col(j).norm();
    if (nj > best_norm) {
      best_norm = nj;
      best = static_cast<int>(j);
    }
  }
  return best;  // -1: every column is numerically zero
}

void flip_to_positive_peak(Vector& w, Vector& t, Vector& c, Vector& u) {
  Eigen::Index peak = 0;
  w.cwiseAbs().maxCoeff(&peak);
  if (w[peak] < 0.0) {
    w = -w;
    t = -t;
    c = -c;
    u = -u;
  }
}

}  // namespace

std::pair<Matrix, Vector> center_columns(const Matrix& m) {
  if (m.rows() < 1) fail(ErrorCode::InvalidInput, "center_columns: empty matrix");
  const Vector means = m.colwise().mean();
  Matrix centered = m.rowwise() - means.transpose();
  return {std::move(centered), means};
}

PlsFit nipals_fit(const Matrix& x, const Matrix& y, int n_components, const NipalsConfig& cfg) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Eigen::Index q = y.cols();
  if (n < 1 || p < 1 || q < 1) fail(ErrorCode::InvalidInput, "nipals_fit: empty input");
  if (y.rows() != n) fail(ErrorCode::InvalidInput, "nipals_fit: X and Y row counts differ");
  if (!x.allFinite() || !y.allFinite()) fail(ErrorCode::InvalidInput, "nipals_fit: non-finite entries");
  if (n_components < 1 || n_components > std::min(p, n))
    fail(ErrorCode::InvalidComponents,
         "nipals_fit: number of components must lie in [1, min(p, n)]");
  if (!(cfg.tolerance > 0.0) || cfg.max_iterations < 1)
    fail(ErrorCode::InvalidInput, "nipals_fit: invalid convergence settings");

  PlsFit fit;
  fit.n_components = n_components;
  auto [xc, x_means] = center_columns(x);
  auto [yc, y_means] = center_columns(y);
  fit.x_means = std::move(x_means);
  fit.y_means = std::move(y_means);

  const double x_scale = xc.norm();
  const double y_scale = yc.norm();
  if (y_scale <= kResidualRelTol * std::max(1.0, y.norm()))
    fail(ErrorCode::DegenerateResponse, "nipals_fit: response has no variance");

  const int k_total = n_components;
  fit.weights_x.resize(p, k_total);
  fit.weights_y.resize(q, k_total);
  fit.scores_x.resize(n, k_total);
  fit.scores_y.resize(n, k_total);
  fit.loadings_x.resize(p, k_total);
  fit.loadings_y.resize(q, k_total);
  fit.inner_coefficients.resize(k_total);
  fit.u_init_columns.reserve(k_total);

  Matrix xk = xc;
  Matrix yk = yc;

  for (int k = 0; k < k_total; ++k) {
    const int init = pick_init_column(yk, y_scale);
    if (init < 0)
      fail(ErrorCode::DegenerateResponse,
           "nipals_fit: response residual exhausted at component " + std::to_string(k + 1));
    fit.u_init_columns.push_back(init);

    Vector u = yk.col(init);
    Vector w(p), t(n), c(q);
    Vector t_prev;
    bool converged = false;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
      w = xk.transpose() * u / u.squaredNorm();
      const double w_norm = w.norm();
      if (w_norm <= kResidualRelTol * std::max(1.0, x_scale))
        fail(ErrorCode::InvalidComponents,
             "nipals_fit: predictor residual exhausted at component " + std::to_string(k + 1));
      w /= w_norm;
      t = xk * w;
      const double t_sq = t.squaredNorm();
      if (t_sq <= 0.0)
        fail(ErrorCode::InvalidComponents,
             "nipals_fit: zero score vector at component " + std::to_string(k + 1));
      c = yk.transpose() * t / t_sq;
      const double c_norm = c.norm();
      if (c_norm <= 0.0)
        fail(ErrorCode::DegenerateResponse,
             "nipals_fit: response orthogonal to scores at component " + std::to_string(k + 1));
      c /= c_norm;
      u = yk * c;
      if (t_prev.size() > 0 && (t - t_prev).norm() <= cfg.tolerance * t_prev.norm()) {
        converged = true;
        break;
      }
      t_prev = t;
    }
    if (!converged)
      fail(ErrorCode::NonConvergence,
           "nipals_fit: score iteration did not converge at component " + std::to_string(k + 1));

    // NIPALS is sign-ambiguous; pin the peak weight entry positive so fits
    // are deterministic.
    flip_to_positive_peak(w, t, c, u);

    const double t_sq = t.squaredNorm();
    const double u_sq = u.squaredNorm();
    const Vector p_load = xk.transpose() * t / t_sq;
    const Vector q_load = u_sq > 0.0 ? Vector(yk.transpose() * u / u_sq) : Vector(Vector::Zero(q));
    const double b = u.dot(t) / t_sq;

    xk -= t * p_load.transpose();
    yk -= b * t * c.transpose();

    fit.weights_x.col(k) = w;
    fit.weights_y.col(k) = c;
    fit.scores_x.col(k) = t;
    fit.scores_y.col(k) = u;
    fit.loadings_x.col(k) = p_load;
    fit.loadings_y.col(k) = q_load;
    fit.inner_coefficients[k] = b;
  }

  fit.residual_x = std::move(xk);
  fit.residual_y = std::move(yk);
  return fit;
}

BetaPls beta_pls(const PlsFit& fit) { return beta_pls(fit, fit.n_components); }

BetaPls beta_pls(const PlsFit& fit, int n_components) {
  if (n_components < 1 || n_components > fit.n_components)
    fail(ErrorCode::InvalidComponents, "beta_pls: component count out of range");
  const auto k = static_cast<Eigen::Index>(n_components);
  const Matrix w = fit.weights_x.leftCols(k);
  const Matrix p_load = fit.loadings_x.leftCols(k);
  const Matrix c = fit.weights_y.leftCols(k);
  const Vector b = fit.inner_coefficients.head(k);

  const Matrix pw = p_load.transpose() * w;
  Eigen::FullPivLU<Matrix> lu(pw);
  if (!lu.isInvertible())
    fail(ErrorCode::RankDeficiency, "beta_pls: P^T W is singular");

  BetaPls beta;
  beta.coefficients = w * lu.solve(b.asDiagonal() * c.transpose());
  beta.x_means = fit.x_means;
  beta.y_means = fit.y_means;
  beta.y_scales = Vector::Ones(fit.y_means.size());
  return beta;
}

Matrix pls_predict(const BetaPls& beta, const Matrix& x_new) {
  if (x_new.cols() != beta.coefficients.rows())
    fail(ErrorCode::InvalidInput, "pls_predict: predictor column count mismatch");
  Matrix centered = x_new.rowwise() - beta.x_means.transpose();
  Matrix pred = centered * beta.coefficients;
  pred.array().rowwise() *= beta.y_scales.transpose().array();
  pred.rowwise() += beta.y_means.transpose();
  return pred;
}

}  // namespace rpls
