#include "rappca/kernels.hpp"

#include <cmath>

namespace rappca {

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::linear: return "linear";
    case KernelFamily::polynomial: return "polynomial";
    case KernelFamily::gaussian: return "gaussian";
  }
  return "linear";
}

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "linear") return KernelFamily::linear;
  if (name == "polynomial") return KernelFamily::polynomial;
  if (name == "gaussian") return KernelFamily::gaussian;
  throw ConfigError("unknown kernel family '" + name + "'");
}

void KernelSpec::validate() const {
  if (!std::isfinite(h)) throw ConfigError("kernel: h must be finite");
  switch (family) {
    case KernelFamily::linear:
      break;  // h ignored
    case KernelFamily::polynomial:
      if (h < 1.0 || h != std::floor(h))
        throw ConfigError("kernel: polynomial degree h must be a positive integer");
      break;
    case KernelFamily::gaussian:
      if (h <= 0.0) throw ConfigError("kernel: gaussian bandwidth h must be > 0");
      break;
  }
}

namespace {

// Core evaluation on rows; tolerates d = 0 (empty dot product / zero distance).
double eval_rows(const KernelSpec& spec, const Eigen::Ref<const Eigen::RowVectorXd>& a,
                 const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  switch (spec.family) {
    case KernelFamily::linear:
      return a.dot(b);
    case KernelFamily::polynomial:
      return std::pow(1.0 + a.dot(b), spec.h);
    case KernelFamily::gaussian:
      return std::exp(-spec.h * (a - b).squaredNorm());
  }
  return 0.0;
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& x2) {
  spec.validate();
  if (x.size() != x2.size()) throw DataError("kernel_eval: dimension mismatch");
  if (x.size() < 1) throw DataError("kernel_eval: empty input vectors");
  if (!x.allFinite() || !x2.allFinite()) throw DataError("kernel_eval: non-finite input");
  return eval_rows(spec, x.transpose(), x2.transpose());
}

Matrix kernel_matrix(const KernelSpec& spec, const Matrix& X) {
  spec.validate();
  if (X.rows() < 1) throw DataError("kernel_matrix: need at least one row");
  require_finite(X, "kernel_matrix");
  const Index n = X.rows();
  Matrix K(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) {
      const double v = eval_rows(spec, X.row(i), X.row(j));
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

Matrix kernel_cross(const KernelSpec& spec, const Matrix& X_train, const Matrix& X_new) {
  spec.validate();
  if (X_train.cols() != X_new.cols()) throw DataError("kernel_cross: column count mismatch");
  require_finite(X_train, "kernel_cross train");
  require_finite(X_new, "kernel_cross new");
  Matrix K(X_new.rows(), X_train.rows());
  for (Index i = 0; i < X_new.rows(); ++i)
    for (Index j = 0; j < X_train.rows(); ++j)
      K(i, j) = eval_rows(spec, X_new.row(i), X_train.row(j));
  return K;
}

}  // namespace rappca
