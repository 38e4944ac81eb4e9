#include "rappca/engines.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace rappca {

void Hyperparams::validate() const {
  if (!(std::isfinite(gamma) && std::isfinite(lambda1) && std::isfinite(lambda2)))
    throw ConfigError("hyperparams: non-finite value");
  if (gamma < 0 || lambda1 < 0 || lambda2 < 0)
    throw ConfigError("hyperparams: gamma, lambda1, lambda2 must be nonnegative");
  if (lambda1 == 0 && lambda2 > 0)
    throw ConfigError("hyperparams: lambda2 > 0 requires lambda1 > 0");
  if (!(delta > 0)) throw ConfigError("hyperparams: delta must be positive");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::classical: return "classical";
    case Method::predictive: return "predictive";
    case Method::rappca: return "rappca";
  }
  return "classical";
}

Method parse_method(const std::string& name) {
  if (name == "classical" || name == "pca") return Method::classical;
  if (name == "predictive" || name == "predpca") return Method::predictive;
  if (name == "rappca") return Method::rappca;
  throw ConfigError("unknown method '" + name + "'");
}

namespace {

// Flip sign so the loading entry of largest magnitude is positive; returns the
// multiplier applied.
double fix_sign(Vector& v) {
  Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0) {
    v = -v;
    return -1.0;
  }
  return 1.0;
}

// Symmetric solve with a pseudo-inverse fallback for (near-)singular systems.
Matrix solve_spd(const Matrix& G, const Matrix& rhs) {
  Eigen::LDLT<Matrix> ldlt(G);
  if (ldlt.info() == Eigen::Success) {
    Matrix x = ldlt.solve(rhs);
    const double scale = rhs.norm();
    if (x.allFinite() && (G * x - rhs).norm() <= 1e-8 * std::max(scale, 1.0)) return x;
  }
  Eigen::BDCSVD<Matrix> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  return svd.solve(rhs);
}

}  // namespace

PCModel classical_pca_fit(const Matrix& Y, int r, bool standardize_y) {
  require_finite(Y, "classical_pca_fit");
  const Index n = Y.rows();
  const Index p = Y.cols();
  if (r < 1 || r > std::min(n, p)) throw DataError("classical_pca_fit: r out of range");

  PCModel model;
  model.method = Method::classical;
  model.y_stats = standardize_y ? column_stats(Y) : ColumnStats::identity(p);
  model.x_stats = ColumnStats::identity(0);
  const Matrix Ys = standardize(Y, model.y_stats);

  Matrix residual = Ys;
  model.V.resize(p, r);
  for (int l = 0; l < r; ++l) {
    Eigen::JacobiSVD<Matrix> svd(residual, Eigen::ComputeThinV);
    Vector v = svd.matrixV().col(0);
    fix_sign(v);
    PCComponent comp;
    comp.v = v;
    comp.u = residual * v;
    comp.objective = residual.squaredNorm() - comp.u.squaredNorm();
    residual.noalias() -= comp.u * v.transpose();
    model.V.col(l) = v;
    model.components.push_back(std::move(comp));
  }
  model.U_train = Ys * model.V;
  return model;
}

PCModel predictive_pca_fit(const Matrix& Y, const Matrix& Z, int r, bool standardize_y,
                           int* n_dropped) {
  require_finite(Y, "predictive_pca_fit Y");
  require_finite(Z, "predictive_pca_fit Z");
  if (Z.rows() != Y.rows()) throw DataError("predictive_pca_fit: row count mismatch");
  const Index n = Y.rows();
  const Index p = Y.cols();
  if (r < 1 || r > std::min(n, p)) throw DataError("predictive_pca_fit: r out of range");

  // Orthonormal basis of col(Z); rank-deficient columns are dropped.
  Eigen::ColPivHouseholderQR<Matrix> qr(Z);
  qr.setThreshold(1e-10);
  const Index rank = qr.rank();
  if (rank < 1) throw DataError("predictive_pca_fit: Z has rank 0");
  if (n_dropped) *n_dropped = static_cast<int>(Z.cols() - rank);
  Matrix G = Matrix(qr.householderQ()).leftCols(rank);

  PCModel model;
  model.method = Method::predictive;
  model.y_stats = standardize_y ? column_stats(Y) : ColumnStats::identity(p);
  model.x_stats = ColumnStats::identity(0);
  const Matrix Ys = standardize(Y, model.y_stats);

  Matrix residual = Ys;
  model.V.resize(p, r);
  for (int l = 0; l < r; ++l) {
    // u = G e with e the top left-singular vector of G' Yl.
    const Matrix M = G.transpose() * residual;  // rank x p
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU);
    const Vector u_con = G * svd.matrixU().col(0);
    Vector v_raw = residual.transpose() * u_con;
    PCComponent comp;
    comp.objective = residual.squaredNorm() - v_raw.squaredNorm();
    const double vnorm = v_raw.norm();
    if (vnorm == 0) throw NumericError("predictive_pca_fit: zero loading");
    Vector v = v_raw / vnorm;
    fix_sign(v);
    comp.v = v;
    comp.u = residual * v;
    residual.noalias() -= comp.u * v.transpose();
    model.V.col(l) = v;
    model.components.push_back(std::move(comp));
  }
  model.U_train = Ys * model.V;
  return model;
}

PCComponent rappca_solve_component(const Matrix& Y_l, const Matrix& K, const Matrix& B,
                                   const Matrix& Q, const Hyperparams& hyper) {
  hyper.validate();
  require_finite(Y_l, "rappca_solve_component Y");
  require_finite(K, "rappca_solve_component K");
  require_finite(B, "rappca_solve_component B");
  const Index n = Y_l.rows();
  const Index p = Y_l.cols();
  const Index m = B.cols();
  if (K.rows() != n || K.cols() != n) throw DataError("rappca_solve_component: K must be n x n");
  if (B.rows() != n) throw DataError("rappca_solve_component: B row count mismatch");
  if (Q.rows() != m || Q.cols() != m) throw DataError("rappca_solve_component: Q must be m x m");

  const Index k = std::min(n, p);
  Eigen::JacobiSVD<Matrix> svd(Y_l, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Matrix S = svd.matrixU().leftCols(k);
  const Vector D = svd.singularValues().head(k);
  const Matrix T = svd.matrixV().leftCols(k);

  PCComponent comp;
  comp.hyper = hyper;

  if (hyper.gamma == 0.0) {
    // Penalties are inert: the solution is the leading right-singular vector.
    Vector q = Vector::Zero(k);
    q[0] = 1.0;
    Vector v = T.col(0);
    const double s = fix_sign(v);
    comp.v = v;
    comp.u = Y_l * v;
    comp.alpha = Vector::Zero(n);
    comp.beta = Vector::Zero(m);
    comp.objective = Y_l.squaredNorm() - D[0] * D[0];
    (void)q;
    (void)s;
    return comp;
  }

  const double gamma = hyper.gamma;
  const Index dim = n + m;
  Matrix Z(n, dim);
  Z.leftCols(n) = K;
  Z.rightCols(m) = B;

  // Combined penalty: the delta shift applies to the penalty copies only, Z
  // carries the unshifted K and B. The beta block is weighted so that
  // eta' P eta expands to lambda1 a'(K+dI)a + lambda2 b'(Q+dI)b exactly; the
  // printed square-root weighting only matches this when lambda1 = lambda2.
  Matrix P = Matrix::Zero(dim, dim);
  P.topLeftCorner(n, n) =
      hyper.lambda1 * (K + hyper.delta * Matrix::Identity(n, n));
  P.bottomRightCorner(m, m) =
      hyper.lambda2 * (Q + hyper.delta * Matrix::Identity(m, m));

  Matrix G = gamma * (Z.transpose() * Z) + P;
  if (hyper.lambda1 == 0.0) {
    // With no penalties the system is rank deficient; a tiny ridge keeps it
    // solvable (the fitted model-space values are unaffected at tolerance).
    const double tr = G.trace();
    G.diagonal().array() += 1e-10 * (tr > 0 ? tr : 1.0);
  }

  const Matrix C = Z.transpose() * S;       // dim x k
  const Matrix X = solve_spd(G, C);         // G^{-1} Z' S
  Matrix mid = C.transpose() * X;           // S' Z G^{-1} Z' S
  mid = 0.5 * (mid + mid.transpose());

  Matrix A = (gamma * gamma) * D.asDiagonal() * mid * D.asDiagonal();
  A.diagonal() -= (gamma - 1.0) * D.array().square().matrix();
  A = 0.5 * (A + A.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
  if (eig.info() != Eigen::Success)
    throw NumericError("rappca_solve_component: eigendecomposition failed");
  Vector q = eig.eigenvectors().col(k - 1);  // largest eigenvalue

  Vector v = T * q;
  const double s = fix_sign(v);
  q *= s;
  comp.v = v;
  comp.u = Y_l * v;

  const Vector eta = gamma * (X * (D.asDiagonal() * q));
  comp.alpha = eta.head(n);
  comp.beta = eta.tail(m);
  comp.objective = Y_l.squaredNorm() - q.dot(A * q);
  return comp;
}

PCModel rappca_fit(const Dataset& data, const KernelSpec& kernel, const SplineBasis& basis,
                   const std::vector<Hyperparams>& hyper_per_component, int r,
                   bool standardize_inputs) {
  data.validate();
  kernel.validate();
  if (static_cast<int>(hyper_per_component.size()) != r)
    throw ConfigError("rappca_fit: need one Hyperparams per component");
  if (r < 1 || r > std::min(data.n(), data.p())) throw DataError("rappca_fit: r out of range");
  if (basis.n() != data.n()) throw DataError("rappca_fit: basis row count mismatch");

  PCModel model;
  model.method = Method::rappca;
  model.kernel = kernel;
  model.basis = basis;
  model.y_stats =
      standardize_inputs ? column_stats(data.Y) : ColumnStats::identity(data.p());
  model.x_stats = (standardize_inputs && data.d() > 0) ? column_stats(data.X, false)
                                                       : ColumnStats::identity(data.d());
  const Matrix Ys = standardize(data.Y, model.y_stats);
  const Matrix Xs = standardize(data.X, model.x_stats);
  const Matrix K = kernel_matrix(kernel, Xs);

  Matrix residual = Ys;
  model.V.resize(data.p(), r);
  for (int l = 0; l < r; ++l) {
    PCComponent comp =
        rappca_solve_component(residual, K, basis.B, basis.Q, hyper_per_component[l]);
    comp.kernel_h = kernel.h;
    residual.noalias() -= comp.u * comp.v.transpose();
    model.V.col(l) = comp.v;
    model.components.push_back(std::move(comp));
  }
  model.U_train = Ys * model.V;
  return model;
}

double objective_value(const Matrix& Y_l, const Vector& v, const Vector& alpha,
                       const Vector& beta, const Matrix& K, const Matrix& B, const Matrix& Q,
                       const Hyperparams& hyper) {
  hyper.validate();
  const Index n = Y_l.rows();
  if (v.size() != Y_l.cols()) throw DataError("objective_value: loading length mismatch");
  if (std::abs(v.norm() - 1.0) > 1e-8) throw DataError("objective_value: v must be unit norm");

  const Vector score = Y_l * v;
  double f = (Y_l - score * v.transpose()).squaredNorm();

  Vector model_space = Vector::Zero(n);
  if (alpha.size() > 0) {
    if (alpha.size() != n) throw DataError("objective_value: alpha length mismatch");
    model_space.noalias() += K * alpha;
  }
  if (beta.size() > 0) {
    if (beta.size() != B.cols()) throw DataError("objective_value: beta length mismatch");
    model_space.noalias() += B * beta;
  }
  f += hyper.gamma * (score - model_space).squaredNorm();
  if (alpha.size() > 0)
    f += hyper.lambda1 * (alpha.dot(K * alpha) + hyper.delta * alpha.squaredNorm());
  if (beta.size() > 0)
    f += hyper.lambda2 * (beta.dot(Q * beta) + hyper.delta * beta.squaredNorm());
  return f;
}

Matrix project_scores(const Matrix& Y_new, const PCModel& model) {
  if (Y_new.cols() != model.p()) throw DataError("project_scores: column count mismatch");
  require_finite(Y_new, "project_scores");
  return standardize(Y_new, model.y_stats) * model.V;
}

Vector polar_perturbation_check(const Matrix& Y_l, const PCComponent& component,
                                const Matrix& K, const Matrix& B, const Matrix& Q,
                                const Hyperparams& hyper, int grid_size) {
  if (Y_l.cols() < 2) throw DataError("polar_perturbation_check: need p >= 2");
  if (grid_size < 8) throw ConfigError("polar_perturbation_check: grid_size must be >= 8");
  const Vector& v = component.v;
  const double rho_sq = v[0] * v[0] + v[1] * v[1];
  const double rho = std::sqrt(std::max(rho_sq, 0.0));
  const double f_base =
      objective_value(Y_l, v, component.alpha, component.beta, K, B, Q, hyper);

  // The uniform grid is anchored at the fitted angle, so one grid point
  // reproduces the solution exactly and the curve's minimum is observable.
  const double theta0 = std::atan2(v[0], v[1]);
  Vector diffs(grid_size);
  Vector v_star = v;
  for (int g = 0; g < grid_size; ++g) {
    const double theta = theta0 + 2.0 * M_PI * g / grid_size;
    v_star[0] = rho * std::sin(theta);
    v_star[1] = rho * std::cos(theta);
    diffs[g] =
        objective_value(Y_l, v_star, component.alpha, component.beta, K, B, Q, hyper) - f_base;
  }
  return diffs;
}

}  // namespace rappca
