#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace rappca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Malformed configuration (bad option combinations, unknown keys). CLI exit 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid input data (dimension mismatch, non-finite values, bad schema). CLI exit 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure (rank deficiency, indefinite matrices). CLI exit 4.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-column mean and sample standard deviation (n-1 denominator).
struct ColumnStats {
  Vector mean;
  Vector sd;

  Index cols() const { return mean.size(); }

  /// Identity statistics: mean 0, sd 1 (standardization becomes a no-op).
  static ColumnStats identity(Index p);
};

/// Column statistics of A. With require_variation, a zero-variance column is a DataError.
ColumnStats column_stats(const Matrix& A, bool require_variation = true);

Matrix standardize(const Matrix& A, const ColumnStats& stats);
Matrix unstandardize(const Matrix& A, const ColumnStats& stats);

void require_finite(const Matrix& A, const std::string& what);

}  // namespace rappca
