#pragma once

#include <string>
#include <vector>

#include "rappca/common.hpp"

namespace rappca {

/// The universal input record: outcomes Y at n spatial locations, with
/// optional covariates X. Row i of every block refers to the same location.
struct Dataset {
  std::vector<std::string> ids;      // n row identifiers
  Matrix coords;                     // n x 2
  Matrix X;                          // n x d (d may be 0)
  Matrix Y;                          // n x p
  std::vector<std::string> x_names;  // d column names
  std::vector<std::string> y_names;  // p column names

  Index n() const { return Y.rows(); }
  Index p() const { return Y.cols(); }
  Index d() const { return X.cols(); }

  /// Row-subset copy (used by CV folds and train/test splits).
  Dataset rows(const std::vector<Index>& idx) const;

  /// Checks row-count agreement, finiteness, n >= 4, p >= 1.
  void validate() const;
};

}  // namespace rappca
