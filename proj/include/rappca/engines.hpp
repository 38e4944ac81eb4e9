#pragma once

#include <optional>
#include <vector>

#include "rappca/common.hpp"
#include "rappca/data.hpp"
#include "rappca/kernels.hpp"
#include "rappca/splines.hpp"

namespace rappca {

/// Per-component penalty weights for the RapPCA objective
///   ||Yl - Yl v v'||_F^2 + gamma ||Yl v - (K a + B b)||^2
///     + lambda1 a'(K + delta I)a + lambda2 b'(Q + delta I)b.
/// (0, 0, 0) recovers classical PCA.
struct Hyperparams {
  double gamma = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double delta = 0.05;

  /// lambda2 > 0 requires lambda1 > 0; all weights nonnegative; delta > 0.
  void validate() const;
};

/// One fitted component: unit loading v, score u = Yl v on the residual it
/// was fit against, and the model-space coefficients.
struct PCComponent {
  Vector v;            // p loading, unit norm
  Vector u;            // n score on the fitting residual
  Vector alpha;        // n kernel coefficients (empty for classical/predictive)
  Vector beta;         // m spline coefficients (empty for classical)
  Hyperparams hyper;
  double kernel_h = 1.0;  // kernel tuning parameter this component was fit with
  double objective = 0.0;
};

enum class Method { classical, predictive, rappca };

std::string to_string(Method method);
Method parse_method(const std::string& name);

/// A fitted dimension-reduction model. U_train is always Y_std * V, where
/// Y_std is the training outcome standardized by y_stats.
struct PCModel {
  Method method = Method::classical;
  std::vector<PCComponent> components;
  Matrix V;        // p x r loadings, unit-norm columns
  Matrix U_train;  // n x r scores
  ColumnStats y_stats;
  ColumnStats x_stats;                // identity when d = 0 or standardize_x off
  std::optional<KernelSpec> kernel;   // rappca only
  std::optional<SplineBasis> basis;   // predictive / rappca

  Index r() const { return V.cols(); }
  Index p() const { return V.rows(); }
};

/// Classical PCA via sequential rank-1 SVD with deflation. Y is centered and
/// scaled per column unless standardize is false. Loadings are sign-fixed so
/// the entry of largest magnitude is positive.
PCModel classical_pca_fit(const Matrix& Y, int r, bool standardize = true);

/// Predictive PCA: each component's score is the unit vector in col(Z)
/// maximizing u' Yl Yl' u; v = Yl' u normalized. Rank-deficient Z columns are
/// dropped (n_dropped reports how many). Deflation projects with v v'.
PCModel predictive_pca_fit(const Matrix& Y, const Matrix& Z, int r,
                           bool standardize = true, int* n_dropped = nullptr);

/// Closed-form global minimizer of the single-component RapPCA objective:
/// eigendecomposition of the A matrix assembled from the thin SVD of Y_l and
/// the model-space blocks, followed by recovery of (alpha, beta).
PCComponent rappca_solve_component(const Matrix& Y_l, const Matrix& K, const Matrix& B,
                                   const Matrix& Q, const Hyperparams& hyper);

/// Full RapPCA fit: standardizes Y (and X for the kernel), then extracts r
/// components by solve + deflate. hyper_per_component must have length r.
PCModel rappca_fit(const Dataset& data, const KernelSpec& kernel, const SplineBasis& basis,
                   const std::vector<Hyperparams>& hyper_per_component, int r,
                   bool standardize = true);

/// Direct evaluation of the four objective terms at (v, alpha, beta).
double objective_value(const Matrix& Y_l, const Vector& v, const Vector& alpha,
                       const Vector& beta, const Matrix& K, const Matrix& B,
                       const Matrix& Q, const Hyperparams& hyper);

/// Scores of new outcome rows: standardizes Y_new with the model's training
/// statistics and returns Y_new_std * V.
Matrix project_scores(const Matrix& Y_new, const PCModel& model);

/// Objective differences f(v*(theta)) - f(v~) over a uniform theta grid
/// covering the circle, where v*(theta) perturbs the first two loading
/// entries in polar coordinates at fixed radius and all other entries stay
/// frozen. The grid is anchored at the fitted angle, so entry 0 is the
/// self-evaluation. Nonnegative everywhere when the solver output is optimal.
Vector polar_perturbation_check(const Matrix& Y_l, const PCComponent& component,
                                const Matrix& K, const Matrix& B, const Matrix& Q,
                                const Hyperparams& hyper, int grid_size);

}  // namespace rappca
