#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace rpls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetric eigendecomposition A = V diag(values) V^T, eigenvalues ascending.
// The input is symmetrized as (A + A^T)/2 before factorizing.
struct SymEigen {
  Vector values;
  Matrix vectors;
};
SymEigen sym_eigen(const Matrix& a);

enum class MatrixFn { Sqrt, InvSqrt, Log, Exp, Inverse };

// Spectral matrix function V diag(f(values)) V^T. Sqrt/InvSqrt/Log/Inverse
// require a strictly positive spectrum.
Matrix mat_fn(const Matrix& a, MatrixFn fn);

// A point on the manifold of symmetric positive definite R x R matrices.
// Construction validates symmetry (1e-12 relative) and positive definiteness
// (smallest eigenvalue > 1e-10 times the largest); entries are stored
// symmetrized.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }

  static SpdMatrix identity(int dim);

 private:
  Matrix entries_;
};

// A tangent vector: a symmetric matrix attached to an explicit base point, so
// that mixing tangent spaces is a checkable error rather than silent misuse.
class TangentSym {
 public:
  TangentSym(Matrix entries, SpdMatrix base);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }
  const SpdMatrix& base() const { return base_; }

  static TangentSym zero(const SpdMatrix& base);

 private:
  Matrix entries_;
  SpdMatrix base_;
};

// Flat coordinates of a tangent vector under the Vec isometry; length
// R(R+1)/2 with the base point carried along.
class TangentCoords {
 public:
  TangentCoords(Vector values, SpdMatrix base);

  int dim() const { return base_.dim(); }
  const Vector& values() const { return values_; }
  const SpdMatrix& base() const { return base_; }

 private:
  Vector values_;
  SpdMatrix base_;
};

// R(R+1)/2
int vec_dim(int dim);

// Coordinate layout: diagonal entries first (0..R-1), then the upper triangle
// row-major. vec_coord_pair(k, R) returns the (i, j) matrix position, i <= j,
// of coordinate k. This fixed order is part of the on-disk formats.
std::pair<int, int> vec_coord_pair(int index, int dim);

// Vec at the identity: (w11..wRR, sqrt(2) w12, sqrt(2) w13, ...) and inverse.
Vector sym_to_vec(const Matrix& w);
Matrix vec_to_sym(const Vector& v);

// Affine-invariant metric g_A(U, V) = tr(U A^-1 V A^-1).
double metric(const SpdMatrix& base, const TangentSym& u, const TangentSym& v);
double tangent_norm(const SpdMatrix& base, const TangentSym& u);

// Geodesic distance: d(A, B)^2 = sum_r log(sigma_r(A^-1/2 B A^-1/2))^2.
double distance(const SpdMatrix& a, const SpdMatrix& b);

// Exp_A(U) = A^1/2 Exp(A^-1/2 U A^-1/2) A^1/2 and its inverse Log_A.
SpdMatrix exp_map(const SpdMatrix& base, const TangentSym& u);
TangentSym log_map(const SpdMatrix& base, const SpdMatrix& b);

// Vec_mu(U) = Vec(mu^-1/2 U mu^-1/2): an isometry onto R^{R(R+1)/2}, so that
// <vec_at(A,U), vec_at(A,V)> = metric(A, U, V). unvec_at inverts it.
TangentCoords vec_at(const SpdMatrix& base, const TangentSym& u);
TangentSym unvec_at(const SpdMatrix& base, const TangentCoords& coords);
TangentSym unvec_at(const SpdMatrix& base, const Vector& coords);

}  // namespace rpls
