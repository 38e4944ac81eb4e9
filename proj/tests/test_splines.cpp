#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "rappca/rng.hpp"
#include "rappca/splines.hpp"

using namespace rappca;

namespace {

Matrix random_coords(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix coords(n, 2);
  for (Index i = 0; i < n; ++i) {
    coords(i, 0) = rng.uniform();
    coords(i, 1) = rng.uniform();
  }
  return coords;
}

}  // namespace

TEST_CASE("build_tprs on unit square corners") {
  Matrix coords(4, 2);
  coords << 0, 0, 1, 0, 0, 1, 1, 1;
  const SplineBasis basis = build_tprs(coords, 4);
  REQUIRE(basis.B.rows() == 4);
  REQUIRE(basis.B.cols() == 4);
  CHECK((basis.B.col(0) - Vector::Ones(4)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((basis.B.col(1) - coords.col(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((basis.B.col(2) - coords.col(1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("penalty matrix is symmetric PSD with zero affine block") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Matrix coords = random_coords(25, seed);
    const SplineBasis basis = build_tprs(coords, 12);
    CHECK(basis.Q.isApprox(basis.Q.transpose()));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(basis.Q);
    CHECK(eig.eigenvalues().minCoeff() >= 0.0);
    CHECK(basis.Q.topLeftCorner(3, 3).cwiseAbs().maxCoeff() == 0.0);

    // Affine coefficient vectors are penalty-free, exactly.
    Vector beta = Vector::Zero(basis.m);
    beta[0] = 2.5;
    beta[1] = -1.0;
    beta[2] = 0.75;
    CHECK(beta.dot(basis.Q * beta) == 0.0);
  }
}

TEST_CASE("build_tprs input errors") {
  const Matrix coords = random_coords(6, 5);
  CHECK_THROWS_AS(build_tprs(coords, 7), DataError);   // m > n
  CHECK_THROWS_AS(build_tprs(coords, 3), DataError);   // m < 4
  Matrix collinear(6, 2);
  for (Index i = 0; i < 6; ++i) {
    collinear(i, 0) = static_cast<double>(i);
    collinear(i, 1) = 2.0 * i + 1.0;
  }
  CHECK_THROWS_AS(build_tprs(collinear, 4), NumericError);
}

TEST_CASE("eval_basis reproduces B at training coordinates") {
  for (std::uint64_t seed : {10u, 11u}) {
    const Matrix coords = random_coords(30, seed);
    const SplineBasis basis = build_tprs(coords, 14);
    const Matrix evaluated = eval_basis(basis, coords);
    CHECK((evaluated - basis.B).cwiseAbs().maxCoeff() <= 1e-10);

    // Single training point reproduces its own row.
    const Matrix one = coords.row(7);
    const Matrix row = eval_basis(basis, one);
    CHECK((row.row(0) - basis.B.row(7)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("eval_basis constant column is all ones") {
  const SplineBasis basis = build_tprs(random_coords(15, 4), 8);
  const Matrix pts = random_coords(9, 77);
  const Matrix evaluated = eval_basis(basis, pts);
  CHECK((evaluated.col(0) - Vector::Ones(9)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("smooth_fit interpolates when lambda = 0 and m = n") {
  const Matrix coords = random_coords(20, 42);
  const SplineBasis basis = build_tprs(coords, 20);
  Rng rng(7);
  Vector y(20);
  for (Index i = 0; i < 20; ++i) y[i] = rng.normal();
  const SmoothFit fit = smooth_fit(basis, y, 0.0);
  const Vector fitted = basis.B * fit.coef;
  CHECK((fitted - y).norm() <= 1e-6 * y.norm());
}

TEST_CASE("smooth_fit approaches the affine least-squares fit as lambda grows") {
  const Matrix coords = random_coords(40, 8);
  const SplineBasis basis = build_tprs(coords, 20);
  Rng rng(9);
  Vector y(40);
  for (Index i = 0; i < 40; ++i)
    y[i] = std::sin(5.0 * coords(i, 0)) + coords(i, 1) + 0.1 * rng.normal();

  const SmoothFit fit = smooth_fit(basis, y, 1e12);
  const Vector fitted = basis.B * fit.coef;

  // Independent affine regression oracle.
  Matrix T(40, 3);
  T.col(0).setOnes();
  T.col(1) = coords.col(0);
  T.col(2) = coords.col(1);
  const Vector affine_fit = T * (T.colPivHouseholderQr().solve(y));
  CHECK((fitted - affine_fit).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("affine targets are recovered exactly for any lambda") {
  const Matrix coords = random_coords(25, 3);
  const SplineBasis basis = build_tprs(coords, 10);
  Vector c0 = Vector::Zero(basis.m);
  c0[0] = 1.0;
  c0[1] = -2.0;
  c0[2] = 0.5;
  const Vector y = basis.B * c0;
  for (double lambda : {0.0, 1e-3, 1.0, 1e6}) {
    const SmoothFit fit = smooth_fit(basis, y, lambda);
    CHECK((basis.B * fit.coef - y).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("residual sum of squares is nondecreasing in lambda") {
  for (std::uint64_t seed : {31u, 32u}) {
    const Matrix coords = random_coords(30, seed);
    const SplineBasis basis = build_tprs(coords, 15);
    Rng rng(seed + 100);
    Vector y(30);
    for (Index i = 0; i < 30; ++i)
      y[i] = std::cos(4.0 * coords(i, 0) * coords(i, 1)) + 0.3 * rng.normal();
    double prev = -1.0;
    for (double lambda : {0.0, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e8}) {
      const SmoothFit fit = smooth_fit(basis, y, lambda);
      const double rss = (y - basis.B * fit.coef).squaredNorm();
      CHECK(rss >= prev - 1e-9 * (1.0 + rss));
      prev = rss;
    }
  }
}

TEST_CASE("GCV smoothing recovers a smooth signal from noise") {
  const Matrix coords = random_coords(80, 12);
  const SplineBasis basis = build_tprs(coords, 40);
  Rng rng(5);
  Vector truth(80), y(80);
  for (Index i = 0; i < 80; ++i) {
    truth[i] = std::sin(3.0 * coords(i, 0)) + std::cos(2.0 * coords(i, 1));
    y[i] = truth[i] + 0.3 * rng.normal();
  }
  const SmoothFit fit = smooth_fit_gcv(basis, y);
  CHECK(fit.lambda > 0.0);
  const double mse = (basis.B * fit.coef - truth).squaredNorm() / 80.0;
  CHECK(mse < 0.09);  // better than the raw noise variance
}

TEST_CASE("smooth_fit input validation") {
  const SplineBasis basis = build_tprs(random_coords(10, 1), 6);
  CHECK_THROWS_AS(smooth_fit(basis, Vector::Ones(9), 1.0), DataError);
  CHECK_THROWS_AS(smooth_fit(basis, Vector::Ones(10), -1.0), DataError);
}
