#include "rappca/splines.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace rappca {

double tps_eta(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

namespace {

Matrix radial_matrix(const Matrix& a, const Matrix& b) {
  Matrix E(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j)
      E(i, j) = tps_eta((a.row(i) - b.row(j)).norm());
  return E;
}

Matrix affine_columns(const Matrix& coords) {
  Matrix T(coords.rows(), 3);
  T.col(0).setOnes();
  T.col(1) = coords.col(0);
  T.col(2) = coords.col(1);
  return T;
}

}  // namespace

SplineBasis build_tprs(const Matrix& coords, int m) {
  if (coords.cols() != 2) throw DataError("build_tprs: coords must be n x 2");
  require_finite(coords, "build_tprs");
  const Index n = coords.rows();
  if (m < 4) throw DataError("build_tprs: m must be at least 4");
  if (m > n) throw DataError("build_tprs: m exceeds the number of locations");

  const Matrix T = affine_columns(coords);
  Eigen::ColPivHouseholderQR<Matrix> qr(T);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3)
    throw NumericError("build_tprs: degenerate (collinear) coordinates");
  const Matrix Qfull = qr.householderQ();
  const Matrix N = Qfull.rightCols(n - 3);  // orthonormal null space of T'

  const Matrix E = radial_matrix(coords, coords);
  Matrix M = N.transpose() * E * N;
  M = 0.5 * (M + M.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
  if (eig.info() != Eigen::Success) throw NumericError("build_tprs: eigendecomposition failed");
  Vector evals = eig.eigenvalues().cwiseMax(0.0);  // clip numerical noise

  // Largest m-3 eigenpairs.
  const int wiggly = m - 3;
  std::vector<Index> order(evals.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return evals[a] > evals[b]; });

  Vector gamma(wiggly);
  Matrix W(N.cols(), wiggly);
  for (int j = 0; j < wiggly; ++j) {
    gamma[j] = evals[order[j]];
    W.col(j) = eig.eigenvectors().col(order[j]);
  }
  const double gmax = gamma.size() > 0 ? gamma[0] : 0.0;
  if (gmax <= 0.0 || gamma[wiggly - 1] <= 1e-12 * gmax)
    throw NumericError("build_tprs: coordinates too degenerate for requested basis size");

  SplineBasis basis;
  basis.coords = coords;
  basis.m = m;
  basis.B.resize(n, m);
  basis.B.leftCols(3) = T;
  basis.B.rightCols(wiggly) = N * W;
  basis.Q = Matrix::Zero(m, m);
  basis.Q.bottomRightCorner(wiggly, wiggly) = gamma.asDiagonal();

  // Representer weights of each wiggly basis function: the thin-plate
  // interpolant of column j of the wiggly block has weights N W_j / gamma_j
  // plus an affine remainder, which together reproduce B at the knots.
  basis.transfer = N * (W * gamma.cwiseInverse().asDiagonal());
  basis.affine = qr.solve(basis.B.rightCols(wiggly) - E * basis.transfer);
  return basis;
}

Matrix eval_basis(const SplineBasis& basis, const Matrix& new_coords) {
  if (new_coords.cols() != 2) throw DataError("eval_basis: coords must be n x 2");
  require_finite(new_coords, "eval_basis");
  const Matrix T_new = affine_columns(new_coords);
  Matrix out(new_coords.rows(), basis.m);
  out.leftCols(3) = T_new;
  const Matrix E_new = radial_matrix(new_coords, basis.coords);
  out.rightCols(basis.m - 3) = E_new * basis.transfer + T_new * basis.affine;
  return out;
}

namespace {

Vector solve_penalized(const Matrix& B, const Matrix& Q, const Vector& y, double lambda) {
  const Index n = B.rows();
  const Index m = B.cols();
  // Stacked least squares [B; sqrt(lambda) Q^{1/2}] keeps the conditioning of B.
  Matrix aug(n + m, m);
  aug.topRows(n) = B;
  aug.bottomRows(m) = (lambda * Q).cwiseMax(0.0).cwiseSqrt();
  Vector rhs = Vector::Zero(n + m);
  rhs.head(n) = y;
  Eigen::ColPivHouseholderQR<Matrix> qr(aug);
  qr.setThreshold(1e-12);
  if (qr.rank() < m)
    throw NumericError("smooth_fit: singular normal equations (rank-deficient basis)");
  return qr.solve(rhs);
}

}  // namespace

SmoothFit smooth_fit(const SplineBasis& basis, const Vector& y, double lambda) {
  if (y.size() != basis.n()) throw DataError("smooth_fit: y length mismatch");
  if (!y.allFinite()) throw DataError("smooth_fit: non-finite y");
  if (!(lambda >= 0.0)) throw DataError("smooth_fit: lambda must be nonnegative");
  SmoothFit fit;
  fit.coef = solve_penalized(basis.B, basis.Q, y, lambda);
  fit.lambda = lambda;
  return fit;
}

SmoothFit smooth_fit_gcv(const SplineBasis& basis, const Vector& y) {
  if (y.size() != basis.n()) throw DataError("smooth_fit: y length mismatch");
  if (!y.allFinite()) throw DataError("smooth_fit: non-finite y");
  const Index n = basis.n();
  const Matrix BtB = basis.B.transpose() * basis.B;
  const Vector Bty = basis.B.transpose() * y;

  const double scale = BtB.trace() / (basis.Q.trace() + 1e-12);
  constexpr int kGridSize = 30;
  double best_lambda = 0.0;
  double best_score = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGridSize; ++i) {
    const double expo = -6.0 + 10.0 * i / (kGridSize - 1);
    const double lambda = scale * std::pow(10.0, expo);
    Eigen::LDLT<Matrix> ldlt(BtB + lambda * basis.Q);
    if (ldlt.info() != Eigen::Success) continue;
    const Vector c = ldlt.solve(Bty);
    const double edf = ldlt.solve(BtB).trace();
    const double denom = static_cast<double>(n) - edf;
    if (denom <= 1e-8) continue;
    const double rss = (y - basis.B * c).squaredNorm();
    const double score = static_cast<double>(n) * rss / (denom * denom);
    if (score < best_score) {
      best_score = score;
      best_lambda = lambda;
    }
  }
  if (!std::isfinite(best_score))
    throw NumericError("smooth_fit_gcv: no admissible lambda on the grid");
  SmoothFit fit = smooth_fit(basis, y, best_lambda);
  fit.gcv = best_score;
  return fit;
}

}  // namespace rappca
