#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "oracles.hpp"
#include "rappca/simgen.hpp"

using namespace rappca;
using namespace rappca::oracles;

namespace {

double sample_sd(const Vector& x) {
  const double mean = x.mean();
  return std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size() - 1));
}

// Least-squares residual of y on [1, F].
double regression_rel_residual(const Matrix& F, const Vector& y) {
  Matrix design(F.rows(), F.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(F.cols()) = F;
  const Vector coef = design.colPivHouseholderQr().solve(y);
  return (y - design * coef).norm() / y.norm();
}

}  // namespace

TEST_CASE("exponential covariance structure") {
  const Matrix coords = random_coords(20, 1);
  const Matrix sigma = exp_cov(coords);
  for (Index i = 0; i < 20; ++i) CHECK(sigma(i, i) == doctest::Approx(1.0));
  CHECK(sigma.isApprox(sigma.transpose()));

  // Distant points approach the constant sill.
  Matrix far(2, 2);
  far << 0.0, 0.0, 1e6, 1e6;
  const Matrix sigma_far = exp_cov(far);
  CHECK(sigma_far(0, 1) == doctest::Approx(0.5));

  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
}

TEST_CASE("sample_mvn matches the target variance") {
  const Matrix sigma = Matrix::Identity(4, 4);
  MvnSampler sampler(sigma);
  Rng rng(77);
  double sum = 0.0, sumsq = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const double x = sampler.sample(rng)[0];
    sum += x;
    sumsq += x * x;
  }
  const double var = sumsq / draws - (sum / draws) * (sum / draws);
  CHECK(var == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("sample_mvn determinism and degenerate covariance") {
  const Matrix coords = random_coords(10, 3);
  const Matrix sigma = exp_cov(coords);
  const Vector a = sample_mvn(sigma, 42);
  const Vector b = sample_mvn(sigma, 42);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  const Vector c = sample_mvn(sigma, 43);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);

  const Vector zero = sample_mvn(Matrix::Zero(5, 5), 7);
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

  Matrix indefinite = Matrix::Identity(3, 3);
  indefinite(2, 2) = -1.0;
  CHECK_THROWS_AS(sample_mvn(indefinite, 1), NumericError);
}

TEST_CASE("scenario 1: scaled PCs and exact linearity") {
  ScenarioConfig cfg;
  cfg.scenario = 1;
  cfg.n = 100;
  cfg.seed = 11;
  const auto [data, truth] = gen_scenario(cfg);
  REQUIRE(truth.pc.cols() == 6);

  for (int l = 0; l < 6; ++l)
    CHECK(std::abs(sample_sd(truth.pc.col(l)) - 1.0) <= 1e-10);

  // First three PCs are exact linear functions of the covariates.
  for (int l = 0; l < 3; ++l)
    CHECK(regression_rel_residual(data.X, truth.pc.col(l)) <= 1e-10);
  // Last three are not.
  for (int l = 3; l < 6; ++l)
    CHECK(regression_rel_residual(data.X, truth.pc.col(l)) > 0.1);
}

TEST_CASE("scenario 3: nonlinear means need squares and interactions") {
  ScenarioConfig cfg;
  cfg.scenario = 3;
  cfg.n = 120;
  cfg.seed = 13;
  const auto [data, truth] = gen_scenario(cfg);

  // Quadratic-and-interaction design reproduces the first three PCs exactly.
  const Index d = data.d();
  Matrix design(data.n(), d + d / 2);
  design.leftCols(d) = data.X.array().square().matrix();
  for (Index j = 0; j < d / 2; ++j)
    design.col(d + j) = (data.X.col(2 * j).array() * data.X.col(2 * j + 1).array()).matrix();
  for (int l = 0; l < 3; ++l) {
    CHECK(regression_rel_residual(data.X, truth.pc.col(l)) >= 0.3);
    CHECK(regression_rel_residual(design, truth.pc.col(l)) <= 1e-10);
  }
}

TEST_CASE("scenario 2: mixing row norms strictly decreasing") {
  ScenarioConfig cfg;
  cfg.scenario = 2;
  cfg.n = 60;
  cfg.seed = 17;
  const auto [data, truth] = gen_scenario(cfg);
  (void)data;
  for (int l = 1; l < 6; ++l)
    CHECK(truth.mixing.row(l).norm() < truth.mixing.row(l - 1).norm());
  // Endpoints follow the configured linear decay.
  CHECK(truth.mixing.row(0).norm() ==
        doctest::Approx(std::sqrt(15.0 / 3.0)).epsilon(1e-12));
  CHECK(truth.mixing.row(5).norm() ==
        doctest::Approx(std::sqrt(15.0 / 3.0) / 6.0).epsilon(1e-12));
}

TEST_CASE("generation is deterministic under the seed") {
  ScenarioConfig cfg;
  cfg.scenario = 1;
  cfg.n = 40;
  cfg.seed = 23;
  const auto [a, ta] = gen_scenario(cfg);
  const auto [b, tb] = gen_scenario(cfg);
  CHECK((a.Y - b.Y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.coords - b.coords).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ta.pc - tb.pc).cwiseAbs().maxCoeff() == 0.0);

  cfg.seed = 24;
  const auto [c, tc] = gen_scenario(cfg);
  (void)tc;
  CHECK((a.Y - c.Y).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("outcome noise has the configured variance (Monte Carlo)") {
  double total_var = 0.0;
  int count = 0;
  for (std::uint64_t rep = 0; rep < 40; ++rep) {
    ScenarioConfig cfg;
    cfg.scenario = 1;
    cfg.n = 50;
    cfg.seed = 1000 + rep;
    const auto [data, truth] = gen_scenario(cfg);
    const Matrix noise = data.Y - truth.pc * truth.mixing;
    total_var += noise.array().square().sum();
    count += static_cast<int>(noise.size());
  }
  CHECK(total_var / count == doctest::Approx(0.1).epsilon(0.1));
}

TEST_CASE("scenario validation") {
  ScenarioConfig cfg;
  cfg.scenario = 4;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ScenarioConfig{};
  cfg.n = 2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
