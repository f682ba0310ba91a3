#include <doctest.h>

#include <cmath>

#include "frechet_mean.hpp"
#include "test_support.hpp"

using namespace rpls;
using testing::random_spd;
using testing::random_well_conditioned;

namespace {

// Closed-form geodesic midpoint A^1/2 (A^-1/2 B A^-1/2)^1/2 A^1/2, assembled
// from matrix functions only; independent of the gradient-descent path.
Matrix geodesic_midpoint(const SpdMatrix& a, const SpdMatrix& b) {
  const Matrix root = mat_fn(a.matrix(), MatrixFn::Sqrt);
  const Matrix inv_root = mat_fn(a.matrix(), MatrixFn::InvSqrt);
  const Matrix whitened = inv_root * b.matrix() * inv_root;
  const Matrix mid = mat_fn(Matrix(0.5 * (whitened + whitened.transpose())), MatrixFn::Sqrt);
  return root * mid * root;
}

double mean_log_norm(const std::vector<SpdMatrix>& samples, const SpdMatrix& mu) {
  Matrix acc = Matrix::Zero(mu.dim(), mu.dim());
  for (const SpdMatrix& y : samples) acc += log_map(mu, y).matrix();
  const TangentSym mean_log(Matrix(acc / static_cast<double>(samples.size())), mu);
  return std::sqrt(metric(mu, mean_log, mean_log));
}

}  // namespace

TEST_CASE("a single sample is its own mean") {
  Rng rng(31);
  const SpdMatrix a(random_spd(4, rng));
  const FrechetResult r = frechet_mean({a});
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK((r.mean.matrix() - a.matrix()).norm() < 1e-12);
  CHECK(r.final_gradient_norm < 1e-12);
}

TEST_CASE("repeated samples have zero gradient at the sample") {
  Rng rng(32);
  const SpdMatrix a(random_spd(3, rng));
  const FrechetResult r = frechet_mean({a, a, a});
  CHECK(r.converged);
  CHECK((r.mean.matrix() - a.matrix()).norm() < 1e-10);
}

TEST_CASE("two-point means equal the closed-form geodesic midpoint") {
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const SpdMatrix a(random_spd(4, rng));
    const SpdMatrix b(random_spd(4, rng));
    const FrechetResult r = frechet_mean({a, b});
    CHECK(r.converged);
    const Matrix expected = geodesic_midpoint(a, b);
    CHECK((r.mean.matrix() - expected).norm() < 1e-6 * expected.norm());
  }
}

TEST_CASE("a converged mean is first-order stationary") {
  Rng rng(34);
  FrechetConfig cfg;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<SpdMatrix> samples;
    for (int i = 0; i < 7; ++i) samples.emplace_back(random_spd(4, rng));
    const FrechetResult r = frechet_mean(samples, cfg);
    REQUIRE(r.converged);
    CHECK(r.final_gradient_norm <= cfg.tolerance);
    // independent recomputation through the public log_map/metric route
    CHECK(mean_log_norm(samples, r.mean) <= cfg.tolerance * 1.0001);
  }
}

TEST_CASE("the mean is equivariant under congruence") {
  Rng rng(35);
  FrechetConfig cfg;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<SpdMatrix> samples;
    for (int i = 0; i < 6; ++i) samples.emplace_back(random_spd(3, rng));
    const Matrix g = random_well_conditioned(3, rng);
    std::vector<SpdMatrix> transformed;
    for (const SpdMatrix& s : samples)
      transformed.emplace_back(Matrix(g * s.matrix() * g.transpose()));

    const FrechetResult base = frechet_mean(samples, cfg);
    const FrechetResult moved = frechet_mean(transformed, cfg);
    REQUIRE(base.converged);
    REQUIRE(moved.converged);
    const SpdMatrix pushed(Matrix(g * base.mean.matrix() * g.transpose()));
    CHECK(distance(moved.mean, pushed) <= 10.0 * cfg.tolerance);
  }
}

TEST_CASE("the objective is non-increasing along the iteration") {
  // the iterates are deterministic, so truncated runs expose the trajectory
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    Rng rng(seed);
    std::vector<SpdMatrix> samples;
    for (int i = 0; i < 6; ++i) samples.emplace_back(random_spd(4, rng));
    double prev = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= 25; ++m) {
      FrechetConfig cfg;
      cfg.max_iterations = m;
      const FrechetResult r = frechet_mean(samples, cfg);
      const double objective = frechet_variance(samples, r.mean);
      CHECK(objective <= prev + 1e-12);
      prev = objective;
      if (r.converged) break;
    }
  }
}

TEST_CASE("non-convergence is a soft flag, not an exception") {
  Rng rng(36);
  std::vector<SpdMatrix> samples;
  for (int i = 0; i < 5; ++i) samples.emplace_back(random_spd(3, rng, 0.2));
  FrechetConfig cfg;
  cfg.max_iterations = 1;
  const FrechetResult r = frechet_mean(samples, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 1);
}

TEST_CASE("configuration and input validation") {
  Rng rng(37);
  const SpdMatrix a(random_spd(3, rng));
  CHECK_THROWS_AS(frechet_mean({}), Error);
  FrechetConfig bad;
  bad.tolerance = 0.0;
  CHECK_THROWS_AS(frechet_mean({a}, bad), Error);
  bad = FrechetConfig{};
  bad.initial_step = 3.0;
  CHECK_THROWS_AS(frechet_mean({a}, bad), Error);
  const SpdMatrix b(random_spd(4, rng));
  CHECK_THROWS_AS(frechet_mean({a, b}), Error);  // mixed dimensions
}

TEST_CASE("frechet_variance: known values and minimality at the mean") {
  Rng rng(38);
  const SpdMatrix a(random_spd(3, rng));
  CHECK(frechet_variance({a}, a) == doctest::Approx(0.0));

  // {I, e^2 I} in dimension 2 about the midpoint e I: both squared distances
  // are 2, so the variance is 2.
  const SpdMatrix eye = SpdMatrix::identity(2);
  const SpdMatrix far(Matrix(std::exp(2.0) * Matrix::Identity(2, 2)));
  const SpdMatrix mid(Matrix(std::exp(1.0) * Matrix::Identity(2, 2)));
  CHECK(frechet_variance({eye, far}, mid) == doctest::Approx(2.0).epsilon(1e-10));

  std::vector<SpdMatrix> samples;
  for (int i = 0; i < 6; ++i) samples.emplace_back(random_spd(3, rng));
  const FrechetResult r = frechet_mean(samples);
  REQUIRE(r.converged);
  const double at_mean = frechet_variance(samples, r.mean);
  for (const SpdMatrix& s : samples) CHECK(at_mean <= frechet_variance(samples, s) + 1e-10);
}
