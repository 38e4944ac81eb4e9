#include "rappca/data.hpp"

namespace rappca {

Dataset Dataset::rows(const std::vector<Index>& idx) const {
  Dataset out;
  const Index k = static_cast<Index>(idx.size());
  out.coords.resize(k, coords.cols());
  out.X.resize(k, X.cols());
  out.Y.resize(k, Y.cols());
  out.ids.reserve(idx.size());
  for (Index i = 0; i < k; ++i) {
    const Index src = idx[static_cast<std::size_t>(i)];
    if (src < 0 || src >= n()) throw DataError("Dataset::rows: index out of range");
    out.coords.row(i) = coords.row(src);
    out.X.row(i) = X.row(src);
    out.Y.row(i) = Y.row(src);
    out.ids.push_back(ids.empty() ? std::to_string(src + 1) : ids[src]);
  }
  out.x_names = x_names;
  out.y_names = y_names;
  return out;
}

void Dataset::validate() const {
  if (Y.rows() < 4) throw DataError("dataset: need at least 4 rows");
  if (Y.cols() < 1) throw DataError("dataset: need at least 1 outcome column");
  if (coords.rows() != Y.rows() || coords.cols() != 2)
    throw DataError("dataset: coords must be n x 2");
  if (X.rows() != Y.rows() && X.cols() > 0)
    throw DataError("dataset: covariate row count mismatch");
  if (!ids.empty() && static_cast<Index>(ids.size()) != Y.rows())
    throw DataError("dataset: id count mismatch");
  require_finite(Y, "dataset Y");
  require_finite(coords, "dataset coords");
  if (X.cols() > 0) require_finite(X, "dataset X");
}

}  // namespace rappca
