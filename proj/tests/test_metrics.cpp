#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rappca/engines.hpp"
#include "rappca/metrics.hpp"

using namespace rappca;
using namespace rappca::oracles;

namespace {

Matrix orthonormal_loadings(Index p, Index r, std::uint64_t seed) {
  const Matrix A = random_gaussian(p, r, seed);
  Eigen::HouseholderQR<Matrix> qr(A);
  return Matrix(qr.householderQ()).leftCols(r);
}

}  // namespace

TEST_CASE("perfect prediction collapses TMSE to the representation error") {
  const Matrix Y_tst = random_gaussian(8, 5, 1);
  const Matrix Y_trn = random_gaussian(12, 5, 2);
  const Matrix V = orthonormal_loadings(5, 2, 3);
  const Matrix U_star = Y_tst * V;
  const Matrix U_trn = Y_trn * V;
  const MetricsReport rep = compute_metrics(Y_tst, V, U_star, Y_trn, U_trn);
  CHECK(rep.mspe == doctest::Approx(0.0));
  CHECK(rep.tmse == doctest::Approx(rep.msre_tst).epsilon(1e-12));
  CHECK(rep.per_pc_mse.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("Pythagorean identity holds exactly for orthonormal loadings") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix Y_tst = random_gaussian(9, 6, 100 + seed);
    const Matrix Y_trn = random_gaussian(11, 6, 200 + seed);
    const Matrix V = orthonormal_loadings(6, 3, 300 + seed);
    const Matrix U_hat = random_gaussian(9, 3, 400 + seed);
    const Matrix U_trn = Y_trn * V;
    const MetricsReport rep = compute_metrics(Y_tst, V, U_hat, Y_trn, U_trn);
    CHECK(std::abs(rep.tmse - rep.mspe - rep.msre_tst) <= 1e-10 * rep.tmse);
    CHECK(rep.tmse >= 0.0);
    CHECK(rep.mspe >= 0.0);
    CHECK(rep.msre_tst >= 0.0);
    CHECK(rep.msre_trn >= 0.0);
  }
}

TEST_CASE("Pythagorean identity is generally violated for oblique loadings") {
  Matrix V(3, 2);
  V << 1, 0.6, 0, 0.8, 0, 0;  // unit columns, not orthogonal
  const Matrix Y_tst = random_gaussian(10, 3, 7);
  const Matrix Y_trn = random_gaussian(10, 3, 8);
  const Matrix U_hat = random_gaussian(10, 2, 9);
  const MetricsReport rep = compute_metrics(Y_tst, V, U_hat, Y_trn, Y_trn * V);
  CHECK(std::abs(rep.tmse - rep.mspe - rep.msre_tst) > 1e-6);
}

TEST_CASE("identity loadings make the representation error vanish") {
  const Matrix Y_tst = random_gaussian(7, 4, 11);
  const Matrix Y_trn = random_gaussian(7, 4, 12);
  const Matrix V = Matrix::Identity(4, 4);
  const Matrix U_hat = random_gaussian(7, 4, 13);
  const MetricsReport rep = compute_metrics(Y_tst, V, U_hat, Y_trn, Y_trn * V);
  CHECK(rep.msre_tst <= 1e-14);
  CHECK(rep.tmse ==
        doctest::Approx((Y_tst - U_hat).squaredNorm() / 7.0).epsilon(1e-12));
}

TEST_CASE("MSRE-trn matches the classical PCA objective value") {
  const Matrix Y = random_gaussian(14, 5, 21);
  const PCModel model = classical_pca_fit(Y, 2);
  const Matrix Ys = standardize(Y, model.y_stats);
  const MetricsReport rep =
      compute_metrics(Ys, model.V, model.U_train, Ys, model.U_train);
  // Objective of the rank-2 approximation: residual after two deflations.
  Matrix residual = Ys;
  for (const auto& comp : model.components) residual -= comp.u * comp.v.transpose();
  CHECK(rep.msre_trn == doctest::Approx(residual.squaredNorm() / 14.0).epsilon(1e-10));
}

TEST_CASE("tmse_component basics and loop oracle") {
  const Matrix Y_l = random_gaussian(9, 4, 31);
  Vector v = random_gaussian(4, 1, 32).col(0);
  v /= v.norm();

  const Vector u_star = Y_l * v;
  CHECK(tmse_component(Y_l, u_star, v) ==
        doctest::Approx((Y_l - u_star * v.transpose()).squaredNorm() / 9.0).epsilon(1e-12));
  CHECK(tmse_component(Y_l, Vector::Zero(9), v) ==
        doctest::Approx(Y_l.squaredNorm() / 9.0).epsilon(1e-12));

  const Vector u_hat = random_gaussian(9, 1, 33).col(0);
  double naive = 0.0;
  for (Index i = 0; i < 9; ++i)
    for (Index j = 0; j < 4; ++j) {
      const double diff = Y_l(i, j) - u_hat[i] * v[j];
      naive += diff * diff;
    }
  naive /= 9.0;
  CHECK(std::abs(tmse_component(Y_l, u_hat, v) - naive) <= 1e-12 * naive);

  CHECK_THROWS_AS(tmse_component(Y_l, u_hat, 2.0 * v), DataError);
  CHECK_THROWS_AS(tmse_component(Y_l, Vector::Zero(3), v), DataError);
}

TEST_CASE("dimension mismatches are rejected") {
  const Matrix Y = random_gaussian(6, 3, 41);
  const Matrix V = orthonormal_loadings(3, 2, 42);
  CHECK_THROWS_AS(compute_metrics(Y, V, random_gaussian(5, 2, 43), Y, Y * V), DataError);
  CHECK_THROWS_AS(compute_metrics(Y, V, random_gaussian(6, 3, 44), Y, Y * V), DataError);
  CHECK_THROWS_AS(compute_metrics(random_gaussian(6, 4, 45), V, random_gaussian(6, 2, 46), Y,
                                  Y * V),
                  DataError);
}
