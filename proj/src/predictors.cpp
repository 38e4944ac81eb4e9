#include "rappca/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <vector>

#include "rappca/rng.hpp"

namespace rappca {

void ForestParams::validate(Index d_feat) const {
  if (n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
  if (min_leaf < 1) throw ConfigError("forest: min_leaf must be >= 1");
  if (mtry < 0 || mtry > d_feat) throw ConfigError("forest: mtry out of range");
}

int ForestParams::resolved_mtry(Index d_feat) const {
  if (mtry > 0) return mtry;
  return std::max(1, static_cast<int>(d_feat / 3));
}

double RegressionForest::Tree::predict(const Vector& row) const {
  int node = 0;
  while (nodes[node].feature >= 0)
    node = row[nodes[node].feature] <= nodes[node].threshold ? nodes[node].left
                                                             : nodes[node].right;
  return nodes[node].value;
}

double RegressionForest::predict_row(const Vector& row) const {
  if (row.size() != n_features_) throw DataError("rf_predict: feature count mismatch");
  double sum = 0.0;
  for (const Tree& tree : trees_) sum += tree.predict(row);
  return sum / static_cast<double>(trees_.size());
}

Vector RegressionForest::tree_predictions(const Vector& row) const {
  if (row.size() != n_features_) throw DataError("rf_predict: feature count mismatch");
  Vector out(static_cast<Index>(trees_.size()));
  for (std::size_t t = 0; t < trees_.size(); ++t)
    out[static_cast<Index>(t)] = trees_[t].predict(row);
  return out;
}

Vector RegressionForest::predict(const Matrix& features) const {
  if (features.cols() != n_features_) throw DataError("rf_predict: feature count mismatch");
  Vector out(features.rows());
  for (Index i = 0; i < features.rows(); ++i) out[i] = predict_row(features.row(i));
  return out;
}

RegressionForest rf_fit(const Matrix& features, const Vector& y, const ForestParams& params) {
  const Index n = features.rows();
  const Index f = features.cols();
  if (n < 2) throw DataError("rf_fit: need at least 2 rows");
  if (y.size() != n) throw DataError("rf_fit: y length mismatch");
  require_finite(features, "rf_fit features");
  if (!y.allFinite()) throw DataError("rf_fit: non-finite y");
  params.validate(f);
  const int mtry = params.resolved_mtry(f);

  RegressionForest forest;
  forest.n_features_ = f;
  forest.trees_.resize(params.n_trees);

  Vector oob_sum = Vector::Zero(n);
  Eigen::VectorXi oob_count = Eigen::VectorXi::Zero(n);

  std::vector<int> feature_pool(f);
  std::iota(feature_pool.begin(), feature_pool.end(), 0);

  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(params.seed, "tree", static_cast<std::uint64_t>(t)));

    std::vector<Index> rows(n);
    std::vector<char> in_bag(n, 0);
    if (params.bootstrap) {
      for (Index i = 0; i < n; ++i) {
        rows[i] = static_cast<Index>(rng.uniform_int(0, static_cast<std::uint64_t>(n - 1)));
        in_bag[rows[i]] = 1;
      }
    } else {
      std::iota(rows.begin(), rows.end(), Index{0});
      std::fill(in_bag.begin(), in_bag.end(), 1);
    }

    auto& tree = forest.trees_[t];
    tree.nodes.clear();

    // Iterative growth with an explicit stack of (node index, row range).
    struct Job {
      int node;
      std::size_t lo, hi;  // range into `rows`
    };
    std::vector<Job> stack;
    tree.nodes.push_back({});
    stack.push_back({0, 0, rows.size()});

    std::vector<int> candidates(f);

    while (!stack.empty()) {
      const Job job = stack.back();
      stack.pop_back();
      const std::size_t count = job.hi - job.lo;

      double mean = 0.0;
      for (std::size_t i = job.lo; i < job.hi; ++i) mean += y[rows[i]];
      mean /= static_cast<double>(count);

      auto make_leaf = [&] {
        tree.nodes[job.node].feature = -1;
        tree.nodes[job.node].value = mean;
      };

      if (count < 2 * static_cast<std::size_t>(params.min_leaf)) {
        make_leaf();
        continue;
      }

      double sse_total = 0.0;
      for (std::size_t i = job.lo; i < job.hi; ++i) {
        const double d = y[rows[i]] - mean;
        sse_total += d * d;
      }
      if (sse_total <= 0.0) {
        make_leaf();
        continue;
      }

      // Sample mtry distinct features (partial Fisher-Yates).
      candidates = feature_pool;
      int best_feature = -1;
      double best_score = sse_total;
      double best_threshold = 0.0;
      for (int c = 0; c < mtry; ++c) {
        const int pick =
            c + static_cast<int>(rng.uniform_int(0, static_cast<std::uint64_t>(f - 1 - c)));
        std::swap(candidates[c], candidates[pick]);
        const int feat = candidates[c];

        std::sort(rows.begin() + job.lo, rows.begin() + job.hi,
                  [&](Index a, Index b) { return features(a, feat) < features(b, feat); });

        // Running decomposition: minimize SSE_left + SSE_right.
        double sum_left = 0.0, sum_right = 0.0;
        for (std::size_t i = job.lo; i < job.hi; ++i) sum_right += y[rows[i]];
        double sqs_left = 0.0, sqs_right = 0.0;
        for (std::size_t i = job.lo; i < job.hi; ++i) sqs_right += y[rows[i]] * y[rows[i]];

        for (std::size_t i = job.lo; i + 1 < job.hi; ++i) {
          const double yi = y[rows[i]];
          sum_left += yi;
          sum_right -= yi;
          sqs_left += yi * yi;
          sqs_right -= yi * yi;
          const std::size_t n_left = i - job.lo + 1;
          const std::size_t n_right = job.hi - i - 1;
          if (n_left < static_cast<std::size_t>(params.min_leaf)) continue;
          if (n_right < static_cast<std::size_t>(params.min_leaf)) break;
          const double x_here = features(rows[i], feat);
          const double x_next = features(rows[i + 1], feat);
          if (x_here == x_next) continue;  // no split point between ties
          const double sse =
              (sqs_left - sum_left * sum_left / static_cast<double>(n_left)) +
              (sqs_right - sum_right * sum_right / static_cast<double>(n_right));
          if (sse < best_score) {
            best_score = sse;
            best_feature = feat;
            best_threshold = 0.5 * (x_here + x_next);
          }
        }
      }

      if (best_feature < 0) {
        make_leaf();
        continue;
      }

      // Partition the range around the chosen threshold.
      const auto mid_it =
          std::stable_partition(rows.begin() + job.lo, rows.begin() + job.hi, [&](Index a) {
            return features(a, best_feature) <= best_threshold;
          });
      const std::size_t mid = static_cast<std::size_t>(mid_it - rows.begin());

      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({});
      const int right = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({});
      tree.nodes[job.node].feature = best_feature;
      tree.nodes[job.node].threshold = best_threshold;
      tree.nodes[job.node].left = left;
      tree.nodes[job.node].right = right;
      stack.push_back({left, job.lo, mid});
      stack.push_back({right, mid, job.hi});
    }

    if (params.bootstrap) {
      for (Index i = 0; i < n; ++i) {
        if (!in_bag[i]) {
          oob_sum[i] += tree.predict(features.row(i));
          oob_count[i] += 1;
        }
      }
    }
  }

  double oob_err = 0.0;
  Index n_oob = 0;
  for (Index i = 0; i < n; ++i) {
    if (oob_count[i] > 0) {
      const double d = oob_sum[i] / oob_count[i] - y[i];
      oob_err += d * d;
      ++n_oob;
    }
  }
  forest.oob_mse_ = n_oob > 0 ? oob_err / static_cast<double>(n_oob) : 0.0;
  return forest;
}

Vector rf_predict(const RegressionForest& forest, const Matrix& features_new) {
  return forest.predict(features_new);
}

namespace {

Matrix stack_features(const Matrix& coords, const Matrix& X) {
  Matrix features(coords.rows(), 2 + X.cols());
  features.leftCols(2) = coords;
  if (X.cols() > 0) features.rightCols(X.cols()) = X;
  return features;
}

}  // namespace

Vector SpatialPredictor::predict(const Matrix& coords, const Matrix& X) const {
  Vector out = Vector::Zero(coords.rows());
  if (forest) out = forest->predict(standardize(stack_features(coords, X), feature_stats));
  out += eval_basis(residual_basis, coords) * residual_coef;
  return out;
}

TwoStepResult two_step_fit_predict(const Matrix& coords_train, const Matrix& X_train,
                                   const Vector& u_train, const Matrix& coords_test,
                                   const Matrix& X_test, const ForestParams& forest_params,
                                   int m_spline) {
  const Index n = coords_train.rows();
  if (coords_train.cols() != 2 || coords_test.cols() != 2)
    throw DataError("two_step_fit_predict: coordinates must be n x 2");
  if (u_train.size() != n) throw DataError("two_step_fit_predict: u length mismatch");
  if (X_train.cols() != X_test.cols())
    throw DataError("two_step_fit_predict: covariate column mismatch");
  if (!u_train.allFinite()) throw DataError("two_step_fit_predict: non-finite scores");

  TwoStepResult result;
  SpatialPredictor& pred = result.predictor;

  Vector target = u_train;
  if (n >= 10) {
    const Matrix raw = stack_features(coords_train, X_train);
    pred.feature_stats = column_stats(raw, false);
    const Matrix features = standardize(raw, pred.feature_stats);
    pred.forest =
        std::make_shared<RegressionForest>(rf_fit(features, u_train, forest_params));
    target -= pred.forest->predict(features);
  } else {
    std::cerr << "two_step_fit_predict: fewer than 10 training rows, "
                 "degrading to spline-only prediction\n";
    pred.spline_only = true;
  }

  int m = m_spline > 0 ? m_spline : 100;
  m = std::min<int>(m, static_cast<int>(n));
  pred.residual_basis = build_tprs(coords_train, m);
  pred.residual_coef = smooth_fit_gcv(pred.residual_basis, target).coef;

  // Extrapolation beyond the training bounding box is allowed but flagged.
  const double x_lo = coords_train.col(0).minCoeff(), x_hi = coords_train.col(0).maxCoeff();
  const double y_lo = coords_train.col(1).minCoeff(), y_hi = coords_train.col(1).maxCoeff();
  for (Index i = 0; i < coords_test.rows(); ++i) {
    if (coords_test(i, 0) < x_lo || coords_test(i, 0) > x_hi || coords_test(i, 1) < y_lo ||
        coords_test(i, 1) > y_hi) {
      result.extrapolation = true;
      break;
    }
  }

  result.predictions = pred.predict(coords_test, X_test);
  return result;
}

ScorePredictor make_two_step_predictor(const ForestParams& params, int m_spline) {
  return [params, m_spline](const Matrix& coords_train, const Matrix& X_train,
                            const Vector& u_train, const Matrix& coords_test,
                            const Matrix& X_test) {
    return two_step_fit_predict(coords_train, X_train, u_train, coords_test, X_test, params,
                                m_spline)
        .predictions;
  };
}

}  // namespace rappca
