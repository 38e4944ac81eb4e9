#pragma once

#include <string>

#include "rappca/common.hpp"

namespace rappca {

enum class KernelFamily { linear, polynomial, gaussian };

std::string to_string(KernelFamily family);
KernelFamily parse_kernel_family(const std::string& name);

/// Covariate-similarity kernel. `h` is the polynomial degree or the Gaussian
/// bandwidth multiplier; it is ignored by the linear family.
struct KernelSpec {
  KernelFamily family = KernelFamily::linear;
  double h = 1.0;

  /// polynomial: h must be a positive integer; gaussian: h > 0.
  void validate() const;
};

/// k(x, x2) for one pair of covariate vectors.
///   linear      x . x2
///   polynomial  (1 + x . x2)^h
///   gaussian    exp(-h ||x - x2||^2)
double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& x2);

/// Gram matrix K with K(i,j) = k(X.row(i), X.row(j)). Each unordered pair is
/// evaluated once, so the result is bitwise symmetric. With d = 0 the dot
/// product is empty and the family formula is applied to it.
Matrix kernel_matrix(const KernelSpec& spec, const Matrix& X);

/// Cross-kernel: entry (i, j) = k(X_new.row(i), X_train.row(j)).
Matrix kernel_cross(const KernelSpec& spec, const Matrix& X_train, const Matrix& X_new);

}  // namespace rappca
