#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "rappca/common.hpp"
#include "rappca/splines.hpp"

namespace rappca {

struct ForestParams {
  int n_trees = 500;
  int mtry = 0;       // features per split; 0 means max(1, floor(d_feat / 3))
  int min_leaf = 5;
  std::uint64_t seed = 0;
  bool bootstrap = true;  // disabled only by tests wanting exact reproduction

  void validate(Index d_feat) const;
  int resolved_mtry(Index d_feat) const;
};

/// Bagged CART regression forest: greedy variance-reduction splits over mtry
/// random features, leaves of at least min_leaf rows. Deterministic given the
/// seed (per-tree seeds are derived from it).
class RegressionForest {
 public:
  Vector predict(const Matrix& features) const;
  double predict_row(const Vector& row) const;

  /// One prediction per tree, in training order.
  Vector tree_predictions(const Vector& row) const;

  /// Mean squared error of out-of-bag predictions (rows never out of bag are
  /// skipped). Only available when fit with bootstrap.
  double oob_mse() const { return oob_mse_; }

  Index n_features() const { return n_features_; }
  int n_trees() const { return static_cast<int>(trees_.size()); }

 private:
  struct Node {
    int feature = -1;       // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;     // leaf mean
  };
  struct Tree {
    std::vector<Node> nodes;
    double predict(const Vector& row) const;
  };

  std::vector<Tree> trees_;
  Index n_features_ = 0;
  double oob_mse_ = 0.0;

  friend RegressionForest rf_fit(const Matrix&, const Vector&, const ForestParams&);
};

RegressionForest rf_fit(const Matrix& features, const Vector& y, const ForestParams& params);
Vector rf_predict(const RegressionForest& forest, const Matrix& features_new);

/// Two-step spatial predictor: random forest on [coords, X], then penalized
/// spline smoothing (GCV) of the training residuals. Predictions add both
/// stages at the query location.
struct SpatialPredictor {
  std::shared_ptr<const RegressionForest> forest;  // null when degraded to spline-only
  SplineBasis residual_basis;
  Vector residual_coef;
  ColumnStats feature_stats;  // standardization applied to [coords, X] for the forest
  bool spline_only = false;

  Vector predict(const Matrix& coords, const Matrix& X) const;
};

struct TwoStepResult {
  Vector predictions;          // u-hat at the test locations
  SpatialPredictor predictor;  // reusable fitted predictor
  bool extrapolation = false;  // any test point outside the training bounding box
};

/// Fits the two-step predictor on (coords, X) -> u and predicts at the test
/// locations. X blocks may have zero columns (coordinates-only features).
/// With fewer than 10 training rows the forest stage is skipped.
TwoStepResult two_step_fit_predict(const Matrix& coords_train, const Matrix& X_train,
                                   const Vector& u_train, const Matrix& coords_test,
                                   const Matrix& X_test, const ForestParams& forest_params,
                                   int m_spline = 0);

/// Signature for pluggable score predictors (kriging etc. can be registered
/// by callers without touching the engines).
using ScorePredictor = std::function<Vector(
    const Matrix& coords_train, const Matrix& X_train, const Vector& u_train,
    const Matrix& coords_test, const Matrix& X_test)>;

/// The default two-step predictor wrapped as a ScorePredictor.
ScorePredictor make_two_step_predictor(const ForestParams& params, int m_spline = 0);

}  // namespace rappca
