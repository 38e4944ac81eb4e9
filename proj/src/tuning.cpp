#include "rappca/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <tuple>

#include "rappca/rng.hpp"

namespace rappca {

TuningGrid default_grid(bool extended_gamma) {
  std::vector<double> axis = {0.05};
  for (int i = 1; i <= 10; ++i) axis.push_back(i / 10.0);
  for (int i = 2; i <= 5; ++i) axis.push_back(static_cast<double>(i));
  TuningGrid grid;
  grid.gamma = axis;
  grid.lambda1 = axis;
  grid.ratio = axis;
  if (extended_gamma) {
    for (int i = 6; i <= 10; ++i) grid.gamma.push_back(static_cast<double>(i));
    for (int i = 20; i <= 50; i += 10) grid.gamma.push_back(static_cast<double>(i));
  }
  return grid;
}

std::string to_string(CVMetric metric) {
  switch (metric) {
    case CVMetric::tmse: return "tmse";
    case CVMetric::mspe: return "mspe";
    case CVMetric::msre: return "msre";
  }
  return "tmse";
}

CVMetric parse_cv_metric(const std::string& name) {
  if (name == "tmse") return CVMetric::tmse;
  if (name == "mspe") return CVMetric::mspe;
  if (name == "msre") return CVMetric::msre;
  throw ConfigError("unknown cv metric '" + name + "'");
}

std::vector<std::vector<Index>> make_folds(Index n, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<Index>(k) > n) throw ConfigError("make_folds: k out of range");
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(derive_seed(seed, "folds"));
  for (Index i = n - 1; i > 0; --i) {
    const Index j = static_cast<Index>(rng.uniform_int(0, static_cast<std::uint64_t>(i)));
    std::swap(perm[i], perm[j]);
  }
  std::vector<std::vector<Index>> folds(k);
  for (Index i = 0; i < n; ++i) folds[i % k].push_back(perm[i]);
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

namespace {

std::vector<Index> complement(const std::vector<Index>& fold, Index n) {
  std::vector<char> in(n, 0);
  for (Index i : fold) in[i] = 1;
  std::vector<Index> out;
  out.reserve(n - fold.size());
  for (Index i = 0; i < n; ++i)
    if (!in[i]) out.push_back(i);
  return out;
}

Matrix take_rows(const Matrix& A, const std::vector<Index>& idx) {
  Matrix out(static_cast<Index>(idx.size()), A.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = A.row(idx[i]);
  return out;
}

int default_spline_m(Index n_train, int requested) {
  int m = requested > 0 ? requested : 200;
  m = std::min<int>(m, static_cast<int>(n_train));
  if (m < 4) throw DataError("spline basis: fewer than 4 training locations");
  return m;
}

}  // namespace

SequentialTuner::SequentialTuner(const Dataset& data, const TuneSettings& settings,
                                 const TuningGrid& grid, const CVPlan& plan)
    : data_(data), settings_(settings), grid_(grid), plan_(plan) {
  data_.validate();
  settings_.kernel.validate();
  y_stats_ = column_stats(data_.Y);
  x_stats_ = data_.d() > 0 ? column_stats(data_.X, false) : ColumnStats::identity(0);
  Y_res_ = standardize(data_.Y, y_stats_);
  X_std_ = standardize(data_.X, x_stats_);
  const int m_full = default_spline_m(data_.n(), settings_.spline_m);
  full_basis_ = build_tprs(data_.coords, m_full);

  const auto folds = make_folds(data_.n(), plan_.k, plan_.seed);
  folds_.resize(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    FoldState& st = folds_[f];
    st.val_rows = folds[f];
    st.train_rows = complement(folds[f], data_.n());
    st.coords_trn = take_rows(data_.coords, st.train_rows);
    st.coords_val = take_rows(data_.coords, st.val_rows);
    st.X_trn_raw = take_rows(data_.X, st.train_rows);
    st.X_val_raw = take_rows(data_.X, st.val_rows);
    const Matrix Y_trn = take_rows(data_.Y, st.train_rows);
    const Matrix Y_val = take_rows(data_.Y, st.val_rows);
    const ColumnStats fold_y = column_stats(Y_trn);
    st.Y_trn_res = standardize(Y_trn, fold_y);
    st.Y_val_res = standardize(Y_val, fold_y);
    if (data_.d() > 0) {
      const ColumnStats fold_x = column_stats(st.X_trn_raw, false);
      st.X_trn_std = standardize(st.X_trn_raw, fold_x);
    } else {
      st.X_trn_std.resize(static_cast<Index>(st.train_rows.size()), 0);
    }
    st.m = default_spline_m(static_cast<Index>(st.train_rows.size()), settings_.spline_m);
    if (settings_.spline_m > 0 && st.m < settings_.spline_m)
      std::cerr << "cv_tune: fold " << f << " too small for spline basis m="
                << settings_.spline_m << ", reduced to " << st.m << "\n";
    st.basis = build_tprs(st.coords_trn, st.m);
  }
}

ComponentTuneResult SequentialTuner::tune_next() {
  const int l = components_done() + 1;
  if (grid_.gamma.empty() || grid_.lambda1.empty() || grid_.ratio.empty())
    throw ConfigError("tuning grid: every axis needs at least one value");

  std::vector<double> h_axis;
  if (settings_.kernel.family == KernelFamily::gaussian) {
    h_axis = grid_.kernel_h.empty() ? std::vector<double>{0.1, 1.0, 10.0} : grid_.kernel_h;
  } else {
    h_axis = {settings_.kernel.h};
  }

  struct Combo {
    Hyperparams hyper;
    double h;
    double ratio;
  };
  std::vector<Combo> combos;
  if (grid_.include_zero_combo) {
    Hyperparams zero;
    zero.delta = settings_.delta;
    combos.push_back({zero, h_axis.front(), 0.0});
  }
  for (double h : h_axis)
    for (double g : grid_.gamma)
      for (double l1 : grid_.lambda1)
        for (double ratio : grid_.ratio) {
          Hyperparams hp;
          hp.gamma = g;
          hp.lambda1 = l1;
          hp.lambda2 = ratio * l1;
          hp.delta = settings_.delta;
          combos.push_back({hp, h, ratio});
        }

  // Per-fold kernel matrices, cached per bandwidth.
  std::map<double, std::vector<Matrix>> kernel_cache;
  auto fold_kernel = [&](double h, std::size_t f) -> const Matrix& {
    auto it = kernel_cache.find(h);
    if (it == kernel_cache.end()) {
      KernelSpec spec = settings_.kernel;
      spec.h = h;
      std::vector<Matrix> per_fold;
      per_fold.reserve(folds_.size());
      for (const auto& st : folds_) per_fold.push_back(kernel_matrix(spec, st.X_trn_std));
      it = kernel_cache.emplace(h, std::move(per_fold)).first;
    }
    return it->second[f];
  };

  ComponentTuneResult result;
  result.best_score = std::numeric_limits<double>::infinity();
  bool have_best = false;

  for (std::size_t c = 0; c < combos.size(); ++c) {
    const Combo& combo = combos[c];
    double total = 0.0;
    for (std::size_t f = 0; f < folds_.size(); ++f) {
      const FoldState& st = folds_[f];
      const PCComponent comp = rappca_solve_component(st.Y_trn_res, fold_kernel(combo.h, f),
                                                      st.basis.B, st.basis.Q, combo.hyper);
      ForestParams fp = settings_.forest;
      fp.seed = derive_seed(plan_.seed, "cv_predict",
                            (static_cast<std::uint64_t>(l) << 32) ^
                                (static_cast<std::uint64_t>(c) << 8) ^ f);
      const Vector u_hat = two_step_fit_predict(st.coords_trn, st.X_trn_raw, comp.u,
                                                st.coords_val, st.X_val_raw, fp)
                               .predictions;
      double score = 0.0;
      const double n_val = static_cast<double>(st.val_rows.size());
      switch (plan_.metric) {
        case CVMetric::tmse:
          score = tmse_component(st.Y_val_res, u_hat, comp.v);
          break;
        case CVMetric::mspe:
          score = (u_hat - Vector(st.Y_val_res * comp.v)).squaredNorm() / n_val;
          break;
        case CVMetric::msre:
          score = (st.Y_val_res - (st.Y_val_res * comp.v) * comp.v.transpose()).squaredNorm() /
                  n_val;
          break;
      }
      total += score;
      result.table.push_back({combo.hyper.gamma, combo.hyper.lambda1, combo.ratio, combo.h,
                              static_cast<int>(f), score});
    }
    const double mean_score = total / static_cast<double>(folds_.size());
    result.table.push_back(
        {combo.hyper.gamma, combo.hyper.lambda1, combo.ratio, combo.h, -1, mean_score});

    // Ties break toward the lexicographically smaller combination.
    const auto key = std::make_tuple(combo.hyper.gamma, combo.hyper.lambda1,
                                     combo.hyper.lambda2, combo.h);
    const auto best_key = std::make_tuple(result.best.gamma, result.best.lambda1,
                                          result.best.lambda2, result.best_kernel_h);
    if (!have_best || mean_score < result.best_score ||
        (mean_score == result.best_score && key < best_key)) {
      have_best = true;
      result.best_score = mean_score;
      result.best = combo.hyper;
      result.best_kernel_h = combo.h;
    }
  }

  advance_with(result.best, result.best_kernel_h);
  results_.push_back(result);
  return result;
}

void SequentialTuner::fix_next(const Hyperparams& hyper, double kernel_h) {
  hyper.validate();
  advance_with(hyper, kernel_h);
}

void SequentialTuner::advance_with(const Hyperparams& hyper, double kernel_h) {
  KernelSpec spec = settings_.kernel;
  spec.h = kernel_h;

  // Refit the winning component on the full data and deflate.
  const Matrix K_full = kernel_matrix(spec, X_std_);
  PCComponent comp = rappca_solve_component(Y_res_, K_full, full_basis_.B, full_basis_.Q, hyper);
  comp.kernel_h = kernel_h;
  Y_res_.noalias() -= comp.u * comp.v.transpose();
  fitted_.push_back(std::move(comp));

  // Advance every fold's residual with a fold-local fit of the same combo.
  for (auto& st : folds_) {
    const Matrix K_trn = kernel_matrix(spec, st.X_trn_std);
    const PCComponent fold_comp =
        rappca_solve_component(st.Y_trn_res, K_trn, st.basis.B, st.basis.Q, hyper);
    st.Y_trn_res.noalias() -= fold_comp.u * fold_comp.v.transpose();
    const Vector val_score = st.Y_val_res * fold_comp.v;
    st.Y_val_res.noalias() -= val_score * fold_comp.v.transpose();
  }
}

PCModel SequentialTuner::model() const {
  PCModel model;
  model.method = Method::rappca;
  model.kernel = settings_.kernel;
  model.basis = full_basis_;
  model.y_stats = y_stats_;
  model.x_stats = x_stats_;
  model.components = fitted_;
  const Index r = static_cast<Index>(fitted_.size());
  model.V.resize(data_.p(), r);
  for (Index l = 0; l < r; ++l) model.V.col(l) = fitted_[static_cast<std::size_t>(l)].v;
  model.U_train = standardize(data_.Y, y_stats_) * model.V;
  return model;
}

ComponentTuneResult cv_tune_component(int l, const std::vector<Hyperparams>& prev_hyper,
                                      const std::vector<double>& prev_kernel_h,
                                      const Dataset& data, const TuningGrid& grid,
                                      const CVPlan& plan, const TuneSettings& settings) {
  if (l < 1) throw ConfigError("cv_tune_component: l must be >= 1");
  if (static_cast<int>(prev_hyper.size()) != l - 1)
    throw ConfigError("cv_tune_component: need l-1 previously tuned combinations");
  SequentialTuner tuner(data, settings, grid, plan);
  for (std::size_t j = 0; j + 1 < static_cast<std::size_t>(l); ++j) {
    const double h = j < prev_kernel_h.size() ? prev_kernel_h[j] : settings.kernel.h;
    tuner.fix_next(prev_hyper[j], h);
  }
  return tuner.tune_next();
}

Hyperparams hyper_for_component(const MethodConfig& cfg, int l) {
  if (cfg.hyper.empty()) return Hyperparams{};
  const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(l), cfg.hyper.size() - 1);
  return cfg.hyper[idx];
}

PCModel fit_method(const Dataset& data, const MethodConfig& cfg) {
  data.validate();
  switch (cfg.method) {
    case Method::classical:
      return classical_pca_fit(data.Y, cfg.r, cfg.standardize);
    case Method::predictive: {
      const int m = default_spline_m(data.n(), cfg.spline_m > 0 ? cfg.spline_m : 10);
      const SplineBasis basis = build_tprs(data.coords, m);
      const ColumnStats xs =
          data.d() > 0 ? column_stats(data.X, false) : ColumnStats::identity(0);
      Matrix Z(data.n(), data.d() + m);
      if (data.d() > 0) Z.leftCols(data.d()) = standardize(data.X, xs);
      Z.rightCols(m) = basis.B;
      int dropped = 0;
      PCModel model = predictive_pca_fit(data.Y, Z, cfg.r, cfg.standardize, &dropped);
      if (dropped > 0)
        std::cerr << "predictive_pca_fit: dropped " << dropped
                  << " rank-deficient model-space columns\n";
      model.basis = basis;
      model.x_stats = xs;
      return model;
    }
    case Method::rappca: {
      const int m = default_spline_m(data.n(), cfg.spline_m);
      const SplineBasis basis = build_tprs(data.coords, m);
      std::vector<Hyperparams> hyper;
      hyper.reserve(cfg.r);
      for (int l = 0; l < cfg.r; ++l) hyper.push_back(hyper_for_component(cfg, l));
      return rappca_fit(data, cfg.kernel, basis, hyper, cfg.r, cfg.standardize);
    }
  }
  throw ConfigError("fit_method: unknown method");
}

namespace {

MetricsReport report_mean(const std::vector<MetricsReport>& reports) {
  MetricsReport mean;
  const double k = static_cast<double>(reports.size());
  mean.per_pc_mse = Vector::Zero(reports.front().per_pc_mse.size());
  for (const auto& r : reports) {
    mean.tmse += r.tmse / k;
    mean.mspe += r.mspe / k;
    mean.msre_tst += r.msre_tst / k;
    mean.msre_trn += r.msre_trn / k;
    mean.per_pc_mse += r.per_pc_mse / k;
    mean.n_trn += r.n_trn;
    mean.n_tst += r.n_tst;
  }
  return mean;
}

MetricsReport report_sd(const std::vector<MetricsReport>& reports, const MetricsReport& mean) {
  MetricsReport sd;
  sd.per_pc_mse = Vector::Zero(mean.per_pc_mse.size());
  if (reports.size() < 2) return sd;
  const double k = static_cast<double>(reports.size() - 1);
  for (const auto& r : reports) {
    sd.tmse += (r.tmse - mean.tmse) * (r.tmse - mean.tmse) / k;
    sd.mspe += (r.mspe - mean.mspe) * (r.mspe - mean.mspe) / k;
    sd.msre_tst += (r.msre_tst - mean.msre_tst) * (r.msre_tst - mean.msre_tst) / k;
    sd.msre_trn += (r.msre_trn - mean.msre_trn) * (r.msre_trn - mean.msre_trn) / k;
    sd.per_pc_mse += (r.per_pc_mse - mean.per_pc_mse).cwiseAbs2() / k;
  }
  sd.tmse = std::sqrt(sd.tmse);
  sd.mspe = std::sqrt(sd.mspe);
  sd.msre_tst = std::sqrt(sd.msre_tst);
  sd.msre_trn = std::sqrt(sd.msre_trn);
  sd.per_pc_mse = sd.per_pc_mse.cwiseSqrt();
  return sd;
}

}  // namespace

EvaluationResult evaluate_cv(const Dataset& data, const MethodConfig& cfg, const CVPlan& plan) {
  data.validate();
  const auto folds = make_folds(data.n(), plan.k, plan.seed);
  EvaluationResult result;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto train_rows = complement(folds[f], data.n());
    const Dataset train = data.rows(train_rows);
    const Dataset test = data.rows(folds[f]);
    const PCModel model = fit_method(train, cfg);

    Matrix U_hat(test.n(), model.r());
    for (Index l = 0; l < model.r(); ++l) {
      ForestParams fp = cfg.forest;
      fp.seed = derive_seed(plan.seed, "eval_predict",
                            (static_cast<std::uint64_t>(f) << 16) ^ static_cast<std::uint64_t>(l));
      U_hat.col(l) = two_step_fit_predict(train.coords, train.X, model.U_train.col(l),
                                          test.coords, test.X, fp)
                         .predictions;
    }
    const Matrix Y_tst_std = standardize(test.Y, model.y_stats);
    const Matrix Y_trn_std = standardize(train.Y, model.y_stats);
    result.per_fold.push_back(
        compute_metrics(Y_tst_std, model.V, U_hat, Y_trn_std, model.U_train));
  }
  result.mean = report_mean(result.per_fold);
  result.sd = report_sd(result.per_fold, result.mean);
  return result;
}

RankCurveTable rank_curves(const Dataset& data, const MethodConfig& cfg, int r_max,
                           const CVPlan& plan) {
  data.validate();
  if (r_max < 1 || r_max > std::min(data.n(), data.p()))
    throw ConfigError("rank_curves: r_max out of range");
  MethodConfig full_cfg = cfg;
  full_cfg.r = r_max;

  // Training representation error after each deflation step, from the
  // full-data fit.
  const PCModel model = fit_method(data, full_cfg);
  Matrix residual = standardize(data.Y, model.y_stats);
  std::vector<double> msre_trn(r_max);
  for (int l = 0; l < r_max; ++l) {
    const PCComponent& comp = model.components[static_cast<std::size_t>(l)];
    residual.noalias() -= comp.u * comp.v.transpose();
    msre_trn[l] = residual.squaredNorm() / static_cast<double>(data.n());
  }

  // CV-averaged per-PC prediction errors.
  const auto folds = make_folds(data.n(), plan.k, plan.seed);
  Vector mse = Vector::Zero(r_max);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto train_rows = complement(folds[f], data.n());
    const Dataset train = data.rows(train_rows);
    const Dataset test = data.rows(folds[f]);
    const PCModel fold_model = fit_method(train, full_cfg);
    const Matrix Y_tst_std = standardize(test.Y, fold_model.y_stats);
    const Matrix U_star = Y_tst_std * fold_model.V;
    for (int l = 0; l < r_max; ++l) {
      ForestParams fp = cfg.forest;
      fp.seed = derive_seed(plan.seed, "rank_predict",
                            (static_cast<std::uint64_t>(f) << 16) ^ static_cast<std::uint64_t>(l));
      const Vector u_hat = two_step_fit_predict(train.coords, train.X,
                                                fold_model.U_train.col(l), test.coords,
                                                test.X, fp)
              .predictions;
      mse[l] += (u_hat - U_star.col(l)).squaredNorm() /
                (static_cast<double>(test.n()) * folds.size());
    }
  }

  RankCurveTable table;
  double cum = 0.0;
  for (int l = 0; l < r_max; ++l) {
    cum += mse[l];
    table.points.push_back({l + 1, cum, msre_trn[l]});
  }
  // Advisory knee: largest discrete second difference of MSRE-trn.
  table.knee = 1;
  double best = -std::numeric_limits<double>::infinity();
  for (int l = 1; l + 1 < r_max; ++l) {
    const double second_diff = msre_trn[l - 1] - 2.0 * msre_trn[l] + msre_trn[l + 1];
    if (second_diff > best) {
      best = second_diff;
      table.knee = l + 1;
    }
  }
  return table;
}

}  // namespace rappca
