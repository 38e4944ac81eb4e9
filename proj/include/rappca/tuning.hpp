#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rappca/engines.hpp"
#include "rappca/metrics.hpp"
#include "rappca/predictors.hpp"

namespace rappca {

/// Candidate axes for the exhaustive hyperparameter search. kernel_h is the
/// optional fourth axis (Gaussian bandwidth); empty means inactive.
struct TuningGrid {
  std::vector<double> gamma;
  std::vector<double> lambda1;
  std::vector<double> ratio;  // lambda2 / lambda1
  std::vector<double> kernel_h;
  bool include_zero_combo = true;
};

/// The paper grid: each axis {0.05, 0.1, 0.2, ..., 1.0, 2, 3, 4, 5} (spacing
/// 0.05 up to 0.1, 0.1 up to 1, 1 above), plus the all-zero combination.
/// extended_gamma appends {6, 7, 8, 9, 10, 20, 30, 40, 50} to the gamma axis.
TuningGrid default_grid(bool extended_gamma = false);

enum class CVMetric { tmse, mspe, msre };

std::string to_string(CVMetric metric);
CVMetric parse_cv_metric(const std::string& name);

struct CVPlan {
  int k = 10;
  std::uint64_t seed = 0;
  CVMetric metric = CVMetric::tmse;
};

/// Seeded random partition of 0..n-1 into k nonempty folds.
std::vector<std::vector<Index>> make_folds(Index n, int k, std::uint64_t seed);

/// Everything the tuner needs besides the grid: kernel family, spline size,
/// forest used for validation-side prediction, and delta.
struct TuneSettings {
  KernelSpec kernel;
  int spline_m = 0;  // 0 -> min(n_train, 200)
  ForestParams forest;
  double delta = 0.05;
};

struct ScoreRow {
  double gamma = 0.0;
  double lambda1 = 0.0;
  double ratio = 0.0;
  double kernel_h = 0.0;
  int fold = -1;  // -1 marks the fold-averaged row
  double score = 0.0;
};

struct ComponentTuneResult {
  Hyperparams best;
  double best_kernel_h = 0.0;
  double best_score = 0.0;
  std::vector<ScoreRow> table;
};

/// Sequential per-component tuner. Component l is searched with components
/// 1..l-1 frozen at their selected values; per-fold residuals are carried
/// forward so re-running reproduces them bit-identically.
class SequentialTuner {
 public:
  SequentialTuner(const Dataset& data, const TuneSettings& settings, const TuningGrid& grid,
                  const CVPlan& plan);

  /// Tunes the next component over grid x folds, refits it on the full data
  /// with the winning combination, and advances the sequential state.
  ComponentTuneResult tune_next();

  /// Advances one component with a fixed combination instead of searching
  /// (used to replay already-tuned components).
  void fix_next(const Hyperparams& hyper, double kernel_h);

  const std::vector<ComponentTuneResult>& results() const { return results_; }

  /// Model over the components fitted so far (U_train = Y_std V convention).
  PCModel model() const;

  int components_done() const { return static_cast<int>(fitted_.size()); }

 private:
  struct FoldState {
    std::vector<Index> train_rows, val_rows;
    Matrix coords_trn, coords_val;
    Matrix X_trn_raw, X_val_raw;  // predictor features
    Matrix Y_trn_res, Y_val_res;  // standardized residuals after fitted components
    Matrix X_trn_std;             // kernel inputs, fold-train statistics
    SplineBasis basis;
    int m = 0;
  };

  void advance_with(const Hyperparams& hyper, double kernel_h);

  Dataset data_;
  TuneSettings settings_;
  TuningGrid grid_;
  CVPlan plan_;
  ColumnStats y_stats_;
  ColumnStats x_stats_;
  Matrix Y_res_;  // full-data standardized residual
  Matrix X_std_;
  SplineBasis full_basis_;
  std::vector<FoldState> folds_;
  std::vector<ComponentTuneResult> results_;
  std::vector<PCComponent> fitted_;
};

/// One-shot wrapper around SequentialTuner for component l (1-based): replays
/// prev_hyper for components 1..l-1, then tunes component l.
ComponentTuneResult cv_tune_component(int l, const std::vector<Hyperparams>& prev_hyper,
                                      const std::vector<double>& prev_kernel_h,
                                      const Dataset& data, const TuningGrid& grid,
                                      const CVPlan& plan, const TuneSettings& settings);

/// Fit-time description of any of the three methods, shared by the CLI
/// pipelines (fit / evaluate / rank-curves / verify-optimality).
struct MethodConfig {
  Method method = Method::rappca;
  int r = 3;
  KernelSpec kernel;
  int spline_m = 0;                // 0 = per-method default
  std::vector<Hyperparams> hyper;  // per component; last entry repeats if short
  ForestParams forest;
  bool standardize = true;
};

Hyperparams hyper_for_component(const MethodConfig& cfg, int l);

/// Dispatches to the right engine. For predictive PCA, Z = [X_std, B(m=10)].
PCModel fit_method(const Dataset& data, const MethodConfig& cfg);

struct EvaluationResult {
  std::vector<MetricsReport> per_fold;
  MetricsReport mean;
  MetricsReport sd;
};

/// K-fold evaluation: fit on the training rows, predict scores at the held-out
/// rows with the two-step predictor, score with compute_metrics.
EvaluationResult evaluate_cv(const Dataset& data, const MethodConfig& cfg, const CVPlan& plan);

struct RankCurvePoint {
  int l = 0;
  double cum_pred_mse = 0.0;  // cumulative per-PC prediction MSE (CV-averaged)
  double msre_trn = 0.0;      // training representation error after l components
};

struct RankCurveTable {
  std::vector<RankCurvePoint> points;
  int knee = 0;  // advisory: l maximizing the second difference of msre_trn
};

/// Elbow curves for rank selection: fits r_max components and reports the
/// cumulative prediction error and MSRE-trn trajectories.
RankCurveTable rank_curves(const Dataset& data, const MethodConfig& cfg, int r_max,
                           const CVPlan& plan);

}  // namespace rappca
