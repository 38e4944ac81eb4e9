#pragma once

#include "rappca/common.hpp"

namespace rappca {

/// Eigen-truncated thin-plate regression spline basis over 2-D coordinates.
///
/// Columns 0..2 of B are the affine functions [1, s1, s2]; the remaining
/// m-3 "wiggly" columns are eigenfunctions of the radial kernel projected
/// onto the affine null space. Q penalizes only the wiggly block, so any
/// affine function is reproduced unpenalized for every lambda.
struct SplineBasis {
  Matrix coords;    // n x 2 training locations
  int m = 0;        // basis dimension (>= 4)
  Matrix B;         // n x m basis values at training locations
  Matrix Q;         // m x m penalty, blockdiag(0_3, diag(gamma))
  Matrix transfer;  // n x (m-3) representer weights of each wiggly function
  Matrix affine;    // 3 x (m-3) affine part of each wiggly function

  static constexpr int null_dim = 3;

  Index n() const { return B.rows(); }
};

/// Radial kernel eta(r) = r^2 log r (eta(0) = 0). The conventional 1/(8 pi)
/// factor is absorbed into the smoothing parameter.
double tps_eta(double r);

/// Builds the basis. Requires n >= m >= 4, finite coordinates, and at least
/// three affinely independent locations.
SplineBasis build_tprs(const Matrix& coords, int m);

/// Evaluates every basis function at new locations (n* x m). On the training
/// coordinates this reproduces B.
Matrix eval_basis(const SplineBasis& basis, const Matrix& new_coords);

struct SmoothFit {
  Vector coef;          // m spline coefficients
  double lambda = 0.0;  // penalty actually used
  double gcv = 0.0;     // GCV score at that lambda (0 when lambda was fixed)
};

/// Penalized least squares: argmin ||y - B c||^2 + lambda c' Q c.
SmoothFit smooth_fit(const SplineBasis& basis, const Vector& y, double lambda);

/// Same, with lambda selected by generalized cross-validation over a 30-point
/// logarithmic grid spanning [1e-6, 1e4] * trace(B'B)/trace(Q).
SmoothFit smooth_fit_gcv(const SplineBasis& basis, const Vector& y);

}  // namespace rappca
