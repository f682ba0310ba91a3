#include <doctest.h>

#include <cmath>

#include "nipals.hpp"
#include "test_support.hpp"

using namespace rpls;
using testing::random_matrix;
using testing::random_vector;

namespace {

// The library's sign convention, applied to an externally computed vector.
Vector with_positive_peak(Vector v) {
  Eigen::Index peak = 0;
  v.cwiseAbs().maxCoeff(&peak);
  return v[peak] < 0.0 ? Vector(-v) : v;
}

void check_fit_invariants(const PlsFit& fit, const Matrix& x) {
  const int k_total = fit.n_components;
  for (int k = 0; k < k_total; ++k) {
    CHECK(fit.weights_x.col(k).norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fit.weights_y.col(k).norm() == doctest::Approx(1.0).epsilon(1e-9));
  }
  for (int j = 0; j < k_total; ++j)
    for (int k = j + 1; k < k_total; ++k) {
      const double dot = std::abs(fit.scores_x.col(j).dot(fit.scores_x.col(k)));
      CHECK(dot <= 1e-8 * fit.scores_x.col(j).norm() * fit.scores_x.col(k).norm());
    }
  const Matrix xc = x.rowwise() - fit.x_means.transpose();
  const Matrix reconstructed = fit.scores_x * fit.loadings_x.transpose() + fit.residual_x;
  CHECK((reconstructed - xc).norm() <= 1e-9 * std::max(1.0, xc.norm()));
  for (int k = 0; k < k_total; ++k) {
    const double ortho = (fit.residual_x.transpose() * fit.scores_x.col(k)).norm();
    CHECK(ortho <= 1e-8 * std::max(1.0, fit.scores_x.col(k).norm()));
  }
}

}  // namespace

TEST_CASE("center_columns: two-point column and already-centered input") {
  Matrix m(2, 1);
  m << 1, 3;
  const auto [centered, means] = center_columns(m);
  CHECK(means[0] == doctest::Approx(2.0));
  CHECK(centered(0, 0) == doctest::Approx(-1.0));
  CHECK(centered(1, 0) == doctest::Approx(1.0));

  Rng rng(41);
  Matrix big = random_matrix(20, 4, rng);
  const auto [centered_big, means_big] = center_columns(big);
  const auto [twice, second_means] = center_columns(centered_big);
  CHECK(second_means.norm() < 1e-12);
  CHECK((twice - centered_big).norm() < 1e-12);
  for (int j = 0; j < 4; ++j)
    CHECK(std::abs(centered_big.col(j).sum()) <
          1e-10 * 20 * std::max(1.0, big.cwiseAbs().maxCoeff()));
}

TEST_CASE("PLS1: the first weight is X^T y normalized") {
  Rng rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix x = random_matrix(15, 6, rng);
    const Matrix y = random_matrix(15, 1, rng);
    const PlsFit fit = nipals_fit(x, y, 1);

    const Matrix xc = x.rowwise() - x.colwise().mean();
    const Matrix yc = y.rowwise() - y.colwise().mean();
    const Vector expected = with_positive_peak(Vector(xc.transpose() * yc.col(0)).normalized());
    CHECK((fit.weights_x.col(0) - expected).norm() < 1e-10);
  }
}

TEST_CASE("orthonormal predictors with y equal to one column give a perfect one-component fit") {
  // X columns from the identity: already centered after appending mirrored rows
  Matrix x(4, 2);
  x << 1, 0,
      -1, 0,
       0, 1,
       0, -1;
  Matrix y(4, 1);
  y << 1, -1, 0, 0;  // equals the first column of X
  const PlsFit fit = nipals_fit(x, y, 1);
  Vector e1(2);
  e1 << 1, 0;
  CHECK((fit.weights_x.col(0) - e1).norm() < 1e-12);
  CHECK((fit.scores_x.col(0) - y.col(0)).norm() < 1e-12);
  CHECK(fit.residual_y.norm() < 1e-12);
}

TEST_CASE("self-regression: b_1 = 1 and full-rank beta is the identity") {
  Rng rng(43);
  const Matrix x = random_matrix(20, 5, rng);
  const PlsFit one = nipals_fit(x, x, 1);
  CHECK(one.inner_coefficients[0] == doctest::Approx(1.0).epsilon(1e-8));

  const PlsFit full = nipals_fit(x, x, 5);
  check_fit_invariants(full, x);
  const BetaPls beta = beta_pls(full);
  CHECK((beta.coefficients - Matrix::Identity(5, 5)).norm() < 1e-6);
}

TEST_CASE("fit invariants hold on random problems") {
  Rng rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = random_matrix(25, 8, rng);
    const Matrix y = random_matrix(25, 3, rng);
    const PlsFit fit = nipals_fit(x, y, 4);
    check_fit_invariants(fit, x);
    CHECK(fit.u_init_columns == std::vector<int>(4, 0));
  }
}

TEST_CASE("beta for K = 1 collapses to w b c^T / (p^T w)") {
  Rng rng(45);
  const Matrix x = random_matrix(18, 5, rng);
  const Matrix y = random_matrix(18, 2, rng);
  const PlsFit fit = nipals_fit(x, y, 3);
  const BetaPls beta1 = beta_pls(fit, 1);
  const Matrix expected = fit.weights_x.col(0) * fit.inner_coefficients[0] *
                          fit.weights_y.col(0).transpose() /
                          fit.loadings_x.col(0).dot(fit.weights_x.col(0));
  CHECK((beta1.coefficients - expected).norm() < 1e-10 * std::max(1.0, expected.norm()));
}

TEST_CASE("regression path agrees with the sequential score projection") {
  Rng rng(46);
  const Matrix x = random_matrix(22, 6, rng);
  const Matrix y = random_matrix(22, 2, rng);
  const PlsFit fit = nipals_fit(x, y, 3);
  const BetaPls beta = beta_pls(fit);

  const Matrix xc = x.rowwise() - fit.x_means.transpose();
  const Matrix via_beta = xc * beta.coefficients;
  const Matrix via_scores =
      fit.scores_x * fit.inner_coefficients.asDiagonal() * fit.weights_y.transpose();
  CHECK((via_beta - via_scores).norm() < 1e-9 * std::max(1.0, via_scores.norm()));
}

TEST_CASE("pls_predict: training means map to the response means") {
  Rng rng(47);
  const Matrix x = random_matrix(12, 4, rng);
  const Matrix y = random_matrix(12, 2, rng);
  const PlsFit fit = nipals_fit(x, y, 2);
  const BetaPls beta = beta_pls(fit);

  const Matrix at_means = pls_predict(beta, Matrix(fit.x_means.transpose()));
  CHECK((at_means.row(0).transpose() - fit.y_means).norm() < 1e-12);

  // in-sample consistency: predictions reproduce the fitted values
  const Matrix fitted =
      (fit.scores_x * fit.inner_coefficients.asDiagonal() * fit.weights_y.transpose()).rowwise() +
      fit.y_means.transpose();
  CHECK((pls_predict(beta, x) - fitted).norm() < 1e-9 * std::max(1.0, fitted.norm()));
}

TEST_CASE("pls_predict ignores predictors with zero coefficients") {
  BetaPls beta;
  beta.coefficients = Matrix::Zero(3, 1);
  beta.coefficients(0, 0) = 2.0;  // rows 1 and 2 are zero
  beta.x_means = Vector::Zero(3);
  beta.y_means = Vector::Zero(1);
  beta.y_scales = Vector::Ones(1);
  Matrix probe(1, 3);
  probe << 1.0, 5.0, -3.0;
  Matrix doubled = probe;
  doubled(0, 2) *= 2.0;
  CHECK(pls_predict(beta, probe)(0, 0) == pls_predict(beta, doubled)(0, 0));
}

TEST_CASE("pls_predict applies the recorded response scaling") {
  BetaPls beta;
  beta.coefficients = Matrix::Identity(2, 2);
  beta.x_means = Vector::Zero(2);
  beta.y_means = Vector::Constant(2, 10.0);
  beta.y_scales = Vector::Constant(2, 3.0);
  Matrix probe(1, 2);
  probe << 1.0, -1.0;
  const Matrix pred = pls_predict(beta, probe);
  CHECK(pred(0, 0) == doctest::Approx(13.0));
  CHECK(pred(0, 1) == doctest::Approx(7.0));
}

TEST_CASE("error contracts: component range, degenerate response, shape mismatch") {
  Rng rng(48);
  const Matrix x = random_matrix(10, 4, rng);
  const Matrix y = random_matrix(10, 2, rng);
  try {
    nipals_fit(x, y, 5);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidComponents);
  }
  try {
    nipals_fit(x, Matrix(Matrix::Zero(10, 2)), 1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateResponse);
  }
  const PlsFit fit = nipals_fit(x, y, 2);
  CHECK_THROWS_AS(pls_predict(beta_pls(fit), Matrix(random_matrix(3, 5, rng))), Error);
  CHECK_THROWS_AS(beta_pls(fit, 3), Error);
}

TEST_CASE("exact fit: a response in the predictor column space is fully explained") {
  Rng rng(50);
  const Matrix x = random_matrix(24, 5, rng);
  const Matrix coef = random_matrix(5, 2, rng);
  const Matrix y = x * coef;  // Y lies in the column space of X
  const PlsFit fit = nipals_fit(x, y, 5);
  const Matrix yc = y.rowwise() - fit.y_means.transpose();
  CHECK(fit.residual_y.norm() <= 1e-6 * yc.norm());
}

TEST_CASE("constant response column falls back to the next initialization column") {
  Rng rng(49);
  const Matrix x = random_matrix(16, 5, rng);
  Matrix y(16, 2);
  y.col(0).setConstant(4.2);  // centered to zero
  y.col(1) = random_vector(16, rng);
  const PlsFit fit = nipals_fit(x, y, 1);
  CHECK(fit.u_init_columns[0] == 1);
}
