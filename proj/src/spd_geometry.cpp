#include "spd_geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rpls {

namespace {

constexpr double kSymmetryRelTol = 1e-12;
constexpr double kPdRelTol = 1e-10;
constexpr double kBaseMatchRelTol = 1e-12;

void check_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) fail(ErrorCode::InvalidInput, std::string(what) + " has non-finite entries");
}

void check_symmetric(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) fail(ErrorCode::InvalidInput, std::string(what) + " is not square");
  const double scale = a.cwiseAbs().maxCoeff();
  const double skew = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (skew > kSymmetryRelTol * std::max(1.0, scale))
    fail(ErrorCode::InvalidInput, std::string(what) + " is not symmetric");
}

bool bases_match(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) return false;
  const double scale = std::max(1.0, a.matrix().cwiseAbs().maxCoeff());
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff() <= kBaseMatchRelTol * scale;
}

void check_same_base(const SpdMatrix& base, const TangentSym& u, const char* what) {
  if (!bases_match(base, u.base()))
    fail(ErrorCode::BaseMismatch, std::string(what) + ": tangent vector attached to a different base point");
}

// Square root and inverse square root from one factorization of the base.
struct SqrtPair {
  Matrix sqrt;
  Matrix inv_sqrt;
};

SqrtPair sqrt_pair(const SpdMatrix& a) {
  const SymEigen eig = sym_eigen(a.matrix());
  const Vector s = eig.values.cwiseSqrt();
  SqrtPair out;
  out.sqrt = eig.vectors * s.asDiagonal() * eig.vectors.transpose();
  out.inv_sqrt = eig.vectors * s.cwiseInverse().asDiagonal() * eig.vectors.transpose();
  return out;
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

}  // namespace

SymEigen sym_eigen(const Matrix& a) {
  check_finite(a, "matrix");
  if (a.rows() != a.cols()) fail(ErrorCode::InvalidInput, "matrix is not square");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(a));
  if (solver.info() != Eigen::Success) fail(ErrorCode::InvalidInput, "eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix mat_fn(const Matrix& a, MatrixFn fn) {
  const SymEigen eig = sym_eigen(a);
  const bool needs_positive = fn != MatrixFn::Exp;
  if (needs_positive && eig.values.minCoeff() <= 0.0)
    fail(ErrorCode::NotPositiveDefinite, "matrix function requires a strictly positive spectrum");
  Vector mapped(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double x = eig.values[i];
    switch (fn) {
      case MatrixFn::Sqrt: mapped[i] = std::sqrt(x); break;
      case MatrixFn::InvSqrt: mapped[i] = 1.0 / std::sqrt(x); break;
      case MatrixFn::Log: mapped[i] = std::log(x); break;
      case MatrixFn::Exp: mapped[i] = std::exp(x); break;
      case MatrixFn::Inverse: mapped[i] = 1.0 / x; break;
    }
  }
  return symmetrized(eig.vectors * mapped.asDiagonal() * eig.vectors.transpose());
}

SpdMatrix::SpdMatrix(Matrix entries) {
  check_finite(entries, "SPD matrix");
  check_symmetric(entries, "SPD matrix");
  entries_ = symmetrized(entries);
  const SymEigen eig = sym_eigen(entries_);
  const double largest = eig.values.maxCoeff();
  if (largest <= 0.0 || eig.values.minCoeff() <= kPdRelTol * largest)
    fail(ErrorCode::NotPositiveDefinite, "matrix is not positive definite");
}

SpdMatrix SpdMatrix::identity(int dim) {
  if (dim < 1) fail(ErrorCode::InvalidInput, "dimension must be positive");
  return SpdMatrix(Matrix::Identity(dim, dim));
}

TangentSym::TangentSym(Matrix entries, SpdMatrix base) : base_(std::move(base)) {
  check_finite(entries, "tangent vector");
  check_symmetric(entries, "tangent vector");
  if (entries.rows() != base_.dim())
    fail(ErrorCode::InvalidInput, "tangent vector dimension does not match base point");
  entries_ = symmetrized(entries);
}

TangentSym TangentSym::zero(const SpdMatrix& base) {
  return TangentSym(Matrix::Zero(base.dim(), base.dim()), base);
}

TangentCoords::TangentCoords(Vector values, SpdMatrix base)
    : values_(std::move(values)), base_(std::move(base)) {
  if (values_.size() != vec_dim(base_.dim()))
    fail(ErrorCode::InvalidInput, "coordinate vector has wrong length for base dimension");
  if (!values_.allFinite()) fail(ErrorCode::InvalidInput, "coordinate vector has non-finite entries");
}

int vec_dim(int dim) { return dim * (dim + 1) / 2; }

std::pair<int, int> vec_coord_pair(int index, int dim) {
  if (index < 0 || index >= vec_dim(dim)) fail(ErrorCode::InvalidInput, "coordinate index out of range");
  if (index < dim) return {index, index};
  int k = index - dim;
  for (int i = 0; i < dim - 1; ++i) {
    const int row_len = dim - 1 - i;
    if (k < row_len) return {i, i + 1 + k};
    k -= row_len;
  }
  fail(ErrorCode::InvalidInput, "coordinate index out of range");
}

Vector sym_to_vec(const Matrix& w) {
  const int dim = static_cast<int>(w.rows());
  Vector v(vec_dim(dim));
  for (int i = 0; i < dim; ++i) v[i] = w(i, i);
  int k = dim;
  const double sqrt2 = std::numbers::sqrt2;
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) v[k++] = sqrt2 * w(i, j);
  return v;
}

Matrix vec_to_sym(const Vector& v) {
  // length R(R+1)/2 -> R
  const int dim = static_cast<int>((std::sqrt(8.0 * static_cast<double>(v.size()) + 1.0) - 1.0) / 2.0 + 0.5);
  if (vec_dim(dim) != v.size()) fail(ErrorCode::InvalidInput, "coordinate vector has non-triangular length");
  Matrix w(dim, dim);
  for (int i = 0; i < dim; ++i) w(i, i) = v[i];
  int k = dim;
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      const double x = v[k++] * inv_sqrt2;
      w(i, j) = x;
      w(j, i) = x;
    }
  return w;
}

double metric(const SpdMatrix& base, const TangentSym& u, const TangentSym& v) {
  check_same_base(base, u, "metric");
  check_same_base(base, v, "metric");
  const Eigen::LLT<Matrix> llt(base.matrix());
  const Matrix x = llt.solve(u.matrix());  // A^-1 U
  const Matrix y = llt.solve(v.matrix());  // A^-1 V
  return x.cwiseProduct(y.transpose()).sum();
}

double tangent_norm(const SpdMatrix& base, const TangentSym& u) {
  return std::sqrt(std::max(0.0, metric(base, u, u)));
}

double distance(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) fail(ErrorCode::InvalidInput, "distance: dimension mismatch");
  const Matrix inv_sqrt = mat_fn(a.matrix(), MatrixFn::InvSqrt);
  const Matrix whitened = symmetrized(inv_sqrt * b.matrix() * inv_sqrt);
  const SymEigen eig = sym_eigen(whitened);
  if (eig.values.minCoeff() <= 0.0)
    fail(ErrorCode::NotPositiveDefinite, "distance: whitened matrix lost positive definiteness");
  double sum = 0.0;
  for (Eigen::Index r = 0; r < eig.values.size(); ++r) {
    const double l = std::log(eig.values[r]);
    sum += l * l;
  }
  return std::sqrt(sum);
}

SpdMatrix exp_map(const SpdMatrix& base, const TangentSym& u) {
  check_same_base(base, u, "exp_map");
  const SqrtPair s = sqrt_pair(base);
  const Matrix whitened = symmetrized(s.inv_sqrt * u.matrix() * s.inv_sqrt);
  const Matrix e = mat_fn(whitened, MatrixFn::Exp);
  return SpdMatrix(symmetrized(s.sqrt * e * s.sqrt));
}

TangentSym log_map(const SpdMatrix& base, const SpdMatrix& b) {
  if (base.dim() != b.dim()) fail(ErrorCode::InvalidInput, "log_map: dimension mismatch");
  const SqrtPair s = sqrt_pair(base);
  const Matrix whitened = symmetrized(s.inv_sqrt * b.matrix() * s.inv_sqrt);
  const Matrix l = mat_fn(whitened, MatrixFn::Log);
  return TangentSym(symmetrized(s.sqrt * l * s.sqrt), base);
}

TangentCoords vec_at(const SpdMatrix& base, const TangentSym& u) {
  check_same_base(base, u, "vec_at");
  const Matrix inv_sqrt = mat_fn(base.matrix(), MatrixFn::InvSqrt);
  const Matrix whitened = symmetrized(inv_sqrt * u.matrix() * inv_sqrt);
  return TangentCoords(sym_to_vec(whitened), base);
}

TangentSym unvec_at(const SpdMatrix& base, const TangentCoords& coords) {
  if (!bases_match(base, coords.base()))
    fail(ErrorCode::BaseMismatch, "unvec_at: coordinates attached to a different base point");
  return unvec_at(base, coords.values());
}

TangentSym unvec_at(const SpdMatrix& base, const Vector& coords) {
  if (coords.size() != vec_dim(base.dim()))
    fail(ErrorCode::InvalidInput, "unvec_at: coordinate vector has wrong length");
  const Matrix w = vec_to_sym(coords);
  const Matrix sqrt = mat_fn(base.matrix(), MatrixFn::Sqrt);
  return TangentSym(symmetrized(sqrt * w * sqrt), base);
}

}  // namespace rpls
