#pragma once

#include <utility>
#include <vector>

#include "spd_geometry.hpp"

namespace rpls {

struct NipalsConfig {
  double tolerance = 1e-10;  // relative change of the score vector
  int max_iterations = 500;
};

// Output of the iterative partial least squares decomposition
//   X = T P^T + E,  Y = U Q^T + F,  U = T B + H.
// Columns of the weight matrices have unit norm, score columns are mutually
// orthogonal, and the inner regression B is diagonal (stored as a vector).
// The inner residual H is not stored; it is U - T diag(b).
struct PlsFit {
  int n_components = 0;
  Matrix weights_x;   // W, p x K
  Matrix weights_y;   // C, q x K
  Matrix scores_x;    // T, n x K
  Matrix scores_y;    // U, n x K
  Matrix loadings_x;  // P, p x K
  Matrix loadings_y;  // Q, q x K
  Vector inner_coefficients;  // diagonal of B, length K
  Vector x_means;     // length p
  Vector y_means;     // length q
  Matrix residual_x;  // E, n x p
  Matrix residual_y;  // F, n x q
  // Which response column seeded the score iteration for each component
  // (column 0 unless it was numerically zero).
  std::vector<int> u_init_columns;
};

// Column centering; returns the centered matrix and the column means.
std::pair<Matrix, Vector> center_columns(const Matrix& m);

// Fit K components. Inputs are centered internally and the means recorded.
PlsFit nipals_fit(const Matrix& x, const Matrix& y, int n_components, const NipalsConfig& cfg = {});

// Regression coefficients beta = W (P^T W)^-1 B C^T together with the affine
// pieces needed to predict on new data. y_scales defaults to ones; callers
// that standardize responses before fitting store the inverse transform here.
struct BetaPls {
  Matrix coefficients;  // p x q
  Vector x_means;
  Vector y_means;
  Vector y_scales;
};

BetaPls beta_pls(const PlsFit& fit);
// Leading-K truncation; NIPALS components are nested so this equals a fresh
// fit with fewer components.
BetaPls beta_pls(const PlsFit& fit, int n_components);

// (X_new - x_means) beta .* y_scales + y_means, row-wise.
Matrix pls_predict(const BetaPls& beta, const Matrix& x_new);

}  // namespace rpls
