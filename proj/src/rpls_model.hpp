#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "frechet_mean.hpp"
#include "nipals.hpp"
#include "spd_geometry.hpp"

namespace rpls {

// Predictor/response spaces the model supports: the SPD cone with the
// affine-invariant geometry, or flat Euclidean space (on which the model
// reduces to standard PLS).
struct ManifoldSpec {
  enum class Kind { SpdAffineInvariant, Euclidean };

  Kind kind = Kind::Euclidean;
  int dim = 0;  // R for SPD points, vector length for Euclidean points

  static ManifoldSpec spd(int r);
  static ManifoldSpec euclidean(int p);

  // Dimension of the linearised coordinates: R(R+1)/2 or dim.
  int embedding_dim() const;

  bool operator==(const ManifoldSpec&) const = default;
};

using ManifoldPoint = std::variant<Vector, SpdMatrix>;

const SpdMatrix& as_spd(const ManifoldPoint& p);
const Vector& as_euclidean(const ManifoldPoint& p);
void check_point(const ManifoldPoint& p, const ManifoldSpec& spec, const char* what);

struct FrechetSummary {
  bool converged = true;
  int iterations = 0;
  double gradient_norm = 0.0;
};

// Fréchet mean dispatched on the manifold kind; Euclidean means are the
// column means of the stacked samples (closed form).
ManifoldPoint manifold_mean(const std::vector<ManifoldPoint>& samples, const ManifoldSpec& spec,
                            const FrechetConfig& cfg, FrechetSummary* summary = nullptr);

// Row i = Vec_mu(Log_mu(X_i)) for SPD data, X_i - mu for Euclidean data.
Matrix linearise(const std::vector<ManifoldPoint>& samples, const ManifoldPoint& mu,
                 const ManifoldSpec& spec);
Vector linearise_one(const ManifoldPoint& sample, const ManifoldPoint& mu, const ManifoldSpec& spec);

// Inverse of the linearisation: Exp_mu(unvec_mu(coords)) or mu + coords.
ManifoldPoint coords_to_point(const ManifoldPoint& mu, const Vector& coords, const ManifoldSpec& spec);

struct RplsConfig {
  int n_components = 2;
  FrechetConfig frechet;
  NipalsConfig nipals;
};

// Fitted Riemannian PLS model: Fréchet means, the PLS decomposition of the
// linearised coordinates, regression coefficients, and the X/Y loadings
// mapped back to tangent vectors at the means (SPD sides only; on Euclidean
// sides the loading columns already live in the data space).
struct RplsModel {
  ManifoldSpec x_manifold;
  ManifoldSpec y_manifold;
  ManifoldPoint mean_x;
  ManifoldPoint mean_y;
  PlsFit pls;
  BetaPls beta;
  std::vector<TangentSym> x_loadings_tangent;
  std::vector<TangentSym> y_loadings_tangent;
  int n_components = 0;
  FrechetSummary frechet_x;
  FrechetSummary frechet_y;
};

// Tangent-space NIPALS: compute Fréchet means, linearise both blocks, run
// NIPALS on the coordinates, and map loadings back to the tangent spaces.
// Fréchet non-convergence is propagated as a soft flag on the model.
RplsModel tnipals_fit(const std::vector<ManifoldPoint>& x_samples,
                      const std::vector<ManifoldPoint>& y_samples, const ManifoldSpec& x_spec,
                      const ManifoldSpec& y_spec, const RplsConfig& cfg);

// Predicted linearised response coordinates (rows), before mapping back to
// the response manifold.
Matrix rpls_predict_coords(const RplsModel& model, const std::vector<ManifoldPoint>& x_new);

// Predictions on the response manifold: Exp_muY of the predicted tangent
// coordinates (plain affine prediction when the response is Euclidean).
std::vector<ManifoldPoint> rpls_predict(const RplsModel& model,
                                        const std::vector<ManifoldPoint>& x_new);

// Synthetic data from the generative model: scores t ~ N(0,1), inner relation
// u = beta1 .* t, points Exp(Exp_mu(sum_l t_l p_l), noise). Deterministic
// given the seed.
struct SyntheticConfig {
  int n_samples = 100;
  int latent = 2;
  double loading_scale = 1.0;
  double noise_scale = 0.0;
  std::uint64_t seed = 0;
  // 0 = dense random loadings; otherwise each component gets this many active
  // coordinates with disjoint supports (off-diagonal coordinates for SPD
  // predictors), which plants an identifiable sparse signal.
  int active_coords = 0;
};

struct SyntheticTruth {
  ManifoldPoint mean_x;
  ManifoldPoint mean_y;
  Matrix x_loadings_coords;  // D_x x L
  Matrix y_loadings_coords;  // D_y x L
  Matrix scores_x;           // n x L
  Matrix scores_y;           // n x L
  Vector inner_coefficients; // beta_1l, length L
  std::vector<int> planted_coords;  // active predictor coordinates (sparse mode)
};

struct SyntheticData {
  std::vector<ManifoldPoint> x;
  std::vector<ManifoldPoint> y;
  SyntheticTruth truth;
};

SyntheticData generate_synthetic(const ManifoldSpec& x_spec, const ManifoldSpec& y_spec,
                                 const SyntheticConfig& cfg);

}  // namespace rpls
