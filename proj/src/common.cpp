#include "rappca/common.hpp"

#include <cmath>

namespace rappca {

ColumnStats ColumnStats::identity(Index p) {
  ColumnStats s;
  s.mean = Vector::Zero(p);
  s.sd = Vector::Ones(p);
  return s;
}

ColumnStats column_stats(const Matrix& A, bool require_variation) {
  const Index n = A.rows();
  const Index p = A.cols();
  if (n < 2) throw DataError("column_stats: need at least 2 rows");
  ColumnStats s;
  s.mean = A.colwise().mean();
  s.sd = Vector(p);
  for (Index j = 0; j < p; ++j) {
    const double ss = (A.col(j).array() - s.mean[j]).square().sum();
    s.sd[j] = std::sqrt(ss / static_cast<double>(n - 1));
    if (s.sd[j] == 0.0) {
      if (require_variation)
        throw DataError("column_stats: column " + std::to_string(j) + " has zero variance");
      s.sd[j] = 1.0;
    }
  }
  return s;
}

Matrix standardize(const Matrix& A, const ColumnStats& stats) {
  if (A.cols() != stats.cols())
    throw DataError("standardize: column count mismatch");
  return (A.rowwise() - stats.mean.transpose()).array().rowwise() /
         stats.sd.transpose().array();
}

Matrix unstandardize(const Matrix& A, const ColumnStats& stats) {
  if (A.cols() != stats.cols())
    throw DataError("unstandardize: column count mismatch");
  return (A.array().rowwise() * stats.sd.transpose().array()).matrix().rowwise() +
         stats.mean.transpose();
}

void require_finite(const Matrix& A, const std::string& what) {
  if (!A.allFinite()) throw DataError(what + ": non-finite values");
}

}  // namespace rappca
