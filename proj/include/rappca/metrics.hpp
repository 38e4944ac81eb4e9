#pragma once

#include "rappca/common.hpp"

namespace rappca {

/// Train/test evaluation of a fitted loading matrix plus predicted scores.
/// All quantities live on the standardized scale.
struct MetricsReport {
  double tmse = 0.0;      // ||Y_tst - U_hat V'||_F^2 / n_tst
  double mspe = 0.0;      // ||(U_hat - U*) V'||_F^2 / n_tst
  double msre_tst = 0.0;  // ||Y_tst - U* V'||_F^2 / n_tst
  double msre_trn = 0.0;  // ||Y_trn - U_trn V'||_F^2 / n_trn
  Vector per_pc_mse;      // ||u_hat_l - u*_l||^2 / n_tst
  Index n_trn = 0;
  Index n_tst = 0;
};

/// Computes the full report. U* = Y_tst V is the oracle score matrix.
MetricsReport compute_metrics(const Matrix& Y_tst, const Matrix& V, const Matrix& U_hat,
                              const Matrix& Y_trn, const Matrix& U_trn);

/// Per-component total error on a deflated test residual:
/// ||Y_l_tst - u_hat v'||_F^2 / n_tst. The tuner's selection target.
double tmse_component(const Matrix& Y_l_tst, const Vector& u_hat, const Vector& v);

}  // namespace rappca
