#include "rappca/metrics.hpp"

#include <cmath>

namespace rappca {

MetricsReport compute_metrics(const Matrix& Y_tst, const Matrix& V, const Matrix& U_hat,
                              const Matrix& Y_trn, const Matrix& U_trn) {
  const Index n_tst = Y_tst.rows();
  const Index n_trn = Y_trn.rows();
  const Index p = V.rows();
  const Index r = V.cols();
  if (Y_tst.cols() != p || Y_trn.cols() != p)
    throw DataError("compute_metrics: outcome column count mismatch");
  if (U_hat.rows() != n_tst || U_hat.cols() != r)
    throw DataError("compute_metrics: U_hat dimension mismatch");
  if (U_trn.rows() != n_trn || U_trn.cols() != r)
    throw DataError("compute_metrics: U_trn dimension mismatch");
  if (n_tst < 1 || n_trn < 1) throw DataError("compute_metrics: empty split");

  MetricsReport rep;
  rep.n_trn = n_trn;
  rep.n_tst = n_tst;
  const Matrix U_star = Y_tst * V;
  const double inv_tst = 1.0 / static_cast<double>(n_tst);
  rep.mspe = ((U_hat - U_star) * V.transpose()).squaredNorm() * inv_tst;
  rep.msre_tst = (Y_tst - U_star * V.transpose()).squaredNorm() * inv_tst;
  rep.tmse = (Y_tst - U_hat * V.transpose()).squaredNorm() * inv_tst;
  rep.msre_trn =
      (Y_trn - U_trn * V.transpose()).squaredNorm() / static_cast<double>(n_trn);
  rep.per_pc_mse.resize(r);
  for (Index l = 0; l < r; ++l)
    rep.per_pc_mse[l] = (U_hat.col(l) - U_star.col(l)).squaredNorm() * inv_tst;
  return rep;
}

double tmse_component(const Matrix& Y_l_tst, const Vector& u_hat, const Vector& v) {
  if (u_hat.size() != Y_l_tst.rows()) throw DataError("tmse_component: score length mismatch");
  if (v.size() != Y_l_tst.cols()) throw DataError("tmse_component: loading length mismatch");
  if (std::abs(v.norm() - 1.0) > 1e-6) throw DataError("tmse_component: v must be unit norm");
  return (Y_l_tst - u_hat * v.transpose()).squaredNorm() /
         static_cast<double>(Y_l_tst.rows());
}

}  // namespace rappca
