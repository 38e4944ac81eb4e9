#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "rappca/kernels.hpp"
#include "rappca/rng.hpp"

using namespace rappca;

namespace {

Matrix random_matrix(Index n, Index d, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  Matrix X(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) X(i, j) = rng.uniform(lo, hi);
  return X;
}

}  // namespace

TEST_CASE("kernel_eval families") {
  Vector x(2), x2(2);
  x << 1, 2;
  x2 << 3, 4;

  CHECK(kernel_eval({KernelFamily::linear, 1.0}, x, x2) == doctest::Approx(11.0));
  CHECK(kernel_eval({KernelFamily::polynomial, 2.0}, x, x2) == doctest::Approx(144.0));
  CHECK(kernel_eval({KernelFamily::gaussian, 0.7}, x, x) == doctest::Approx(1.0));
}

TEST_CASE("kernel_eval input validation") {
  Vector x(2), bad(3);
  x << 1, 2;
  bad << 1, 2, 3;
  CHECK_THROWS_AS(kernel_eval({KernelFamily::linear, 1.0}, x, bad), DataError);

  Vector inf(2);
  inf << 1.0, std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(kernel_eval({KernelFamily::linear, 1.0}, x, inf), DataError);

  Vector empty(0), empty2(0);
  CHECK_THROWS_AS(kernel_eval({KernelFamily::linear, 1.0}, empty, empty2), DataError);
}

TEST_CASE("kernel spec validation") {
  CHECK_THROWS_AS(kernel_eval({KernelFamily::polynomial, 1.5}, Vector::Ones(2), Vector::Ones(2)),
                  ConfigError);
  CHECK_THROWS_AS(kernel_eval({KernelFamily::gaussian, 0.0}, Vector::Ones(2), Vector::Ones(2)),
                  ConfigError);
  // linear ignores h entirely
  Vector x = Vector::Ones(2);
  CHECK(kernel_eval({KernelFamily::linear, -42.0}, x, x) == doctest::Approx(2.0));
}

TEST_CASE("kernel_matrix single row and symmetry") {
  Matrix X(1, 1);
  X << 1.0;
  const Matrix K = kernel_matrix({KernelFamily::linear, 1.0}, X);
  REQUIRE(K.rows() == 1);
  CHECK(K(0, 0) == doctest::Approx(1.0));

  const Matrix X5 = random_matrix(7, 3, 99);
  for (auto family : {KernelFamily::linear, KernelFamily::polynomial, KernelFamily::gaussian}) {
    const Matrix K5 = kernel_matrix({family, 2.0}, X5);
    CHECK(K5 == K5.transpose());  // bitwise symmetry by construction
  }
}

TEST_CASE("kernel matrices are PSD up to tolerance") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const Matrix X = random_matrix(5, 2, seed);
    const Matrix K = kernel_matrix({KernelFamily::gaussian, 1.0}, X);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(K);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  }
  // Larger random instances, linear and gaussian families.
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const Matrix X = random_matrix(50, 4, seed);
    for (auto family : {KernelFamily::linear, KernelFamily::gaussian}) {
      const Matrix K = kernel_matrix({family, 1.0}, X);
      Eigen::SelfAdjointEigenSolver<Matrix> eig(K);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-8 * K.norm());
    }
  }
}

TEST_CASE("kernel_cross basics") {
  Matrix X_train(2, 1), X_new(1, 1);
  X_train << 1, 2;
  X_new << 3;
  const Matrix C = kernel_cross({KernelFamily::linear, 1.0}, X_train, X_new);
  REQUIRE(C.rows() == 1);
  REQUIRE(C.cols() == 2);
  CHECK(C(0, 0) == doctest::Approx(3.0));
  CHECK(C(0, 1) == doctest::Approx(6.0));

  Matrix bad(1, 2);
  CHECK_THROWS_AS(kernel_cross({KernelFamily::linear, 1.0}, X_train, bad), DataError);
}

TEST_CASE("kernel_cross matches kernel_matrix on identical inputs") {
  const Matrix X = random_matrix(9, 3, 7);
  for (auto family : {KernelFamily::linear, KernelFamily::polynomial, KernelFamily::gaussian}) {
    const KernelSpec spec{family, 2.0};
    const Matrix K = kernel_matrix(spec, X);
    const Matrix C = kernel_cross(spec, X, X);
    CHECK((K - C).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("kernel_cross equals brute-force double loop") {
  const KernelSpec spec{KernelFamily::polynomial, 2.0};
  const Matrix X_train = random_matrix(6, 2, 21);
  const Matrix X_new = random_matrix(4, 2, 22);
  const Matrix C = kernel_cross(spec, X_train, X_new);
  for (Index i = 0; i < X_new.rows(); ++i) {
    for (Index j = 0; j < X_train.rows(); ++j) {
      const double dot = X_new.row(i).dot(X_train.row(j));
      const double expected = (1.0 + dot) * (1.0 + dot);
      CHECK(C(i, j) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}
