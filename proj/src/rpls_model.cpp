#include "rpls_model.hpp"

#include <cmath>
#include <string>

#include "rng.hpp"

namespace rpls {

ManifoldSpec ManifoldSpec::spd(int r) {
  if (r < 1) fail(ErrorCode::InvalidInput, "ManifoldSpec: dimension must be positive");
  return {Kind::SpdAffineInvariant, r};
}

ManifoldSpec ManifoldSpec::euclidean(int p) {
  if (p < 1) fail(ErrorCode::InvalidInput, "ManifoldSpec: dimension must be positive");
  return {Kind::Euclidean, p};
}

int ManifoldSpec::embedding_dim() const {
  return kind == Kind::SpdAffineInvariant ? vec_dim(dim) : dim;
}

const SpdMatrix& as_spd(const ManifoldPoint& p) {
  const SpdMatrix* m = std::get_if<SpdMatrix>(&p);
  if (!m) fail(ErrorCode::InvalidInput, "expected an SPD manifold point");
  return *m;
}

const Vector& as_euclidean(const ManifoldPoint& p) {
  const Vector* v = std::get_if<Vector>(&p);
  if (!v) fail(ErrorCode::InvalidInput, "expected a Euclidean manifold point");
  return *v;
}

void check_point(const ManifoldPoint& p, const ManifoldSpec& spec, const char* what) {
  if (spec.kind == ManifoldSpec::Kind::SpdAffineInvariant) {
    if (as_spd(p).dim() != spec.dim)
      fail(ErrorCode::InvalidInput, std::string(what) + ": SPD point dimension mismatch");
  } else {
    if (as_euclidean(p).size() != spec.dim)
      fail(ErrorCode::InvalidInput, std::string(what) + ": vector length mismatch");
  }
}

ManifoldPoint manifold_mean(const std::vector<ManifoldPoint>& samples, const ManifoldSpec& spec,
                            const FrechetConfig& cfg, FrechetSummary* summary) {
  if (samples.empty()) fail(ErrorCode::EmptyInput, "manifold_mean: no samples");
  for (const ManifoldPoint& s : samples) check_point(s, spec, "manifold_mean");

  if (spec.kind == ManifoldSpec::Kind::Euclidean) {
    Matrix stacked(samples.size(), spec.dim);
    for (std::size_t i = 0; i < samples.size(); ++i) stacked.row(i) = as_euclidean(samples[i]);
    const Vector mean = center_columns(stacked).second;
    if (summary) *summary = FrechetSummary{true, 0, 0.0};
    return mean;
  }

  std::vector<SpdMatrix> spd;
  spd.reserve(samples.size());
  for (const ManifoldPoint& s : samples) spd.push_back(as_spd(s));
  FrechetResult result = frechet_mean(spd, cfg);
  if (summary) *summary = FrechetSummary{result.converged, result.iterations, result.final_gradient_norm};
  return result.mean;
}

Matrix linearise(const std::vector<ManifoldPoint>& samples, const ManifoldPoint& mu,
                 const ManifoldSpec& spec) {
  if (samples.empty()) fail(ErrorCode::EmptyInput, "linearise: no samples");
  for (const ManifoldPoint& s : samples) check_point(s, spec, "linearise");
  check_point(mu, spec, "linearise");

  const int d = spec.embedding_dim();
  Matrix out(samples.size(), d);

  if (spec.kind == ManifoldSpec::Kind::Euclidean) {
    const Vector& center = as_euclidean(mu);
    for (std::size_t i = 0; i < samples.size(); ++i)
      out.row(i) = as_euclidean(samples[i]) - center;
    return out;
  }

  // Vec_mu(Log_mu(X)) = Vec(Log(mu^-1/2 X mu^-1/2)): the whitening inside Vec
  // cancels the congruence inside Log, so one factorization of mu serves the
  // whole batch.
  const SpdMatrix& base = as_spd(mu);
  const Matrix inv_sqrt = mat_fn(base.matrix(), MatrixFn::InvSqrt);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Matrix whitened = inv_sqrt * as_spd(samples[i]).matrix() * inv_sqrt;
    const Matrix log_w = mat_fn(Matrix(0.5 * (whitened + whitened.transpose())), MatrixFn::Log);
    out.row(i) = sym_to_vec(log_w);
  }
  return out;
}

Vector linearise_one(const ManifoldPoint& sample, const ManifoldPoint& mu, const ManifoldSpec& spec) {
  return linearise({sample}, mu, spec).row(0);
}

ManifoldPoint coords_to_point(const ManifoldPoint& mu, const Vector& coords, const ManifoldSpec& spec) {
  check_point(mu, spec, "coords_to_point");
  if (coords.size() != spec.embedding_dim())
    fail(ErrorCode::InvalidInput, "coords_to_point: coordinate length mismatch");
  if (spec.kind == ManifoldSpec::Kind::Euclidean) return Vector(as_euclidean(mu) + coords);
  const SpdMatrix& base = as_spd(mu);
  return exp_map(base, unvec_at(base, coords));
}

RplsModel tnipals_fit(const std::vector<ManifoldPoint>& x_samples,
                      const std::vector<ManifoldPoint>& y_samples, const ManifoldSpec& x_spec,
                      const ManifoldSpec& y_spec, const RplsConfig& cfg) {
  if (x_samples.size() < 2) fail(ErrorCode::InvalidInput, "tnipals_fit: need at least two samples");
  if (x_samples.size() != y_samples.size())
    fail(ErrorCode::InvalidInput, "tnipals_fit: predictor and response sample counts differ");

  RplsModel model;
  model.x_manifold = x_spec;
  model.y_manifold = y_spec;
  model.n_components = cfg.n_components;
  model.mean_x = manifold_mean(x_samples, x_spec, cfg.frechet, &model.frechet_x);
  model.mean_y = manifold_mean(y_samples, y_spec, cfg.frechet, &model.frechet_y);

  const Matrix x_lin = linearise(x_samples, model.mean_x, x_spec);
  const Matrix y_lin = linearise(y_samples, model.mean_y, y_spec);

  model.pls = nipals_fit(x_lin, y_lin, cfg.n_components, cfg.nipals);
  model.beta = beta_pls(model.pls);

  if (x_spec.kind == ManifoldSpec::Kind::SpdAffineInvariant) {
    const SpdMatrix& mu = as_spd(model.mean_x);
    for (int k = 0; k < cfg.n_components; ++k)
      model.x_loadings_tangent.push_back(unvec_at(mu, Vector(model.pls.loadings_x.col(k))));
  }
  if (y_spec.kind == ManifoldSpec::Kind::SpdAffineInvariant) {
    const SpdMatrix& mu = as_spd(model.mean_y);
    for (int k = 0; k < cfg.n_components; ++k)
      model.y_loadings_tangent.push_back(unvec_at(mu, Vector(model.pls.loadings_y.col(k))));
  }
  return model;
}

Matrix rpls_predict_coords(const RplsModel& model, const std::vector<ManifoldPoint>& x_new) {
  if (x_new.empty()) fail(ErrorCode::EmptyInput, "rpls_predict: no inputs");
  const Matrix coords = linearise(x_new, model.mean_x, model.x_manifold);
  return pls_predict(model.beta, coords);
}

std::vector<ManifoldPoint> rpls_predict(const RplsModel& model,
                                        const std::vector<ManifoldPoint>& x_new) {
  const Matrix pred = rpls_predict_coords(model, x_new);
  std::vector<ManifoldPoint> out;
  out.reserve(x_new.size());
  for (Eigen::Index i = 0; i < pred.rows(); ++i)
    out.push_back(coords_to_point(model.mean_y, Vector(pred.row(i)), model.y_manifold));
  return out;
}

namespace {

ManifoldPoint random_base_point(const ManifoldSpec& spec, Rng& rng) {
  if (spec.kind == ManifoldSpec::Kind::Euclidean) {
    Vector v(spec.dim);
    for (int i = 0; i < spec.dim; ++i) v[i] = rng.next_normal();
    return v;
  }
  Matrix s(spec.dim, spec.dim);
  for (int i = 0; i < spec.dim; ++i)
    for (int j = i; j < spec.dim; ++j) {
      const double v = 0.3 * rng.next_normal();
      s(i, j) = v;
      s(j, i) = v;
    }
  return SpdMatrix(mat_fn(s, MatrixFn::Exp));
}

// Columns: orthonormal directions scaled by scale * 0.7^l so that earlier
// components dominate.
Matrix dense_loadings(int dim, int latent, double scale, Rng& rng) {
  Matrix m(dim, latent);
  for (int l = 0; l < latent; ++l)
    for (int i = 0; i < dim; ++i) m(i, l) = rng.next_normal();
  // modified Gram-Schmidt
  for (int l = 0; l < latent; ++l) {
    for (int j = 0; j < l; ++j) m.col(l) -= m.col(j).dot(m.col(l)) * m.col(j);
    const double norm = m.col(l).norm();
    if (norm <= 1e-12) fail(ErrorCode::InvalidInput, "generate_synthetic: degenerate loading draw");
    m.col(l) /= norm;
  }
  for (int l = 0; l < latent; ++l) m.col(l) *= scale * std::pow(0.7, l);
  return m;
}

Matrix sparse_loadings(int dim, int latent, int active, double scale,
                       const std::vector<int>& allowed, Rng& rng,
                       std::vector<int>* planted) {
  if (active * latent > static_cast<int>(allowed.size()))
    fail(ErrorCode::InvalidInput, "generate_synthetic: not enough coordinates for the requested supports");
  std::vector<int> pool = allowed;
  for (int i = static_cast<int>(pool.size()) - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(pool[i], pool[j]);
  }
  Matrix m = Matrix::Zero(dim, latent);
  int next = 0;
  for (int l = 0; l < latent; ++l) {
    for (int a = 0; a < active; ++a) {
      const int coord = pool[next++];
      const double sign = rng.next_double() < 0.5 ? -1.0 : 1.0;
      m(coord, l) = sign / std::sqrt(static_cast<double>(active));
      planted->push_back(coord);
    }
    m.col(l) *= scale * std::pow(0.7, l);
  }
  return m;
}

ManifoldPoint point_from_coords_noisy(const ManifoldPoint& mu, const Vector& coords,
                                      const ManifoldSpec& spec, double noise_scale, Rng& rng) {
  ManifoldPoint clean = coords_to_point(mu, coords, spec);
  if (noise_scale <= 0.0) return clean;
  Vector g(spec.embedding_dim());
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = noise_scale * rng.next_normal();
  // Noise is isotropic in the vec coordinates of the tangent space at the
  // noiseless point, pushed through Exp.
  return coords_to_point(clean, g, spec);
}

}  // namespace

SyntheticData generate_synthetic(const ManifoldSpec& x_spec, const ManifoldSpec& y_spec,
                                 const SyntheticConfig& cfg) {
  const int dx = x_spec.embedding_dim();
  const int dy = y_spec.embedding_dim();
  if (cfg.n_samples < 1) fail(ErrorCode::InvalidInput, "generate_synthetic: need at least one sample");
  if (cfg.latent < 1 || cfg.latent > std::min(dx, dy))
    fail(ErrorCode::InvalidInput, "generate_synthetic: latent count must lie in [1, min(D_x, D_y)]");
  if (cfg.loading_scale < 0.0 || cfg.noise_scale < 0.0)
    fail(ErrorCode::InvalidInput, "generate_synthetic: scales must be nonnegative");

  Rng rng(cfg.seed);
  SyntheticData data;
  SyntheticTruth& truth = data.truth;

  truth.mean_x = random_base_point(x_spec, rng);
  truth.mean_y = random_base_point(y_spec, rng);

  if (cfg.active_coords > 0) {
    std::vector<int> allowed;
    const int first = x_spec.kind == ManifoldSpec::Kind::SpdAffineInvariant ? x_spec.dim : 0;
    for (int i = first; i < dx; ++i) allowed.push_back(i);
    truth.x_loadings_coords = sparse_loadings(dx, cfg.latent, cfg.active_coords, cfg.loading_scale,
                                              allowed, rng, &truth.planted_coords);
  } else {
    truth.x_loadings_coords = dense_loadings(dx, cfg.latent, cfg.loading_scale, rng);
  }
  truth.y_loadings_coords = dense_loadings(dy, cfg.latent, 1.0, rng);

  truth.inner_coefficients = Vector::Ones(cfg.latent);

  truth.scores_x.resize(cfg.n_samples, cfg.latent);
  for (int i = 0; i < cfg.n_samples; ++i)
    for (int l = 0; l < cfg.latent; ++l) truth.scores_x(i, l) = rng.next_normal();
  truth.scores_y = truth.scores_x * truth.inner_coefficients.asDiagonal();

  data.x.reserve(cfg.n_samples);
  data.y.reserve(cfg.n_samples);
  for (int i = 0; i < cfg.n_samples; ++i) {
    const Vector cx = truth.x_loadings_coords * truth.scores_x.row(i).transpose();
    data.x.push_back(point_from_coords_noisy(truth.mean_x, cx, x_spec, cfg.noise_scale, rng));
    const Vector cy = truth.y_loadings_coords * truth.scores_y.row(i).transpose();
    data.y.push_back(point_from_coords_noisy(truth.mean_y, cy, y_spec, cfg.noise_scale, rng));
  }
  return data;
}

}  // namespace rpls
