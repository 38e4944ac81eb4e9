#include "rappca/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "rappca/io.hpp"
#include "rappca/rng.hpp"
#include "rappca/simgen.hpp"
#include "rappca/tuning.hpp"

namespace fs = std::filesystem;

namespace rappca {

namespace {

// ---------------------------------------------------------------------------
// Config loading helpers
// ---------------------------------------------------------------------------

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    const auto b = item.find_last_not_of(" \t");
    out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

// Expands entries ending in '*' against the CSV header (prefix match, header
// order), skipping columns already claimed.
std::vector<std::string> expand_columns(const std::vector<std::string>& patterns,
                                        const std::vector<std::string>& header,
                                        std::set<std::string>& claimed) {
  std::vector<std::string> out;
  for (const auto& pat : patterns) {
    if (!pat.empty() && pat.back() == '*') {
      const std::string prefix = pat.substr(0, pat.size() - 1);
      for (const auto& col : header) {
        if (col.size() >= prefix.size() && col.compare(0, prefix.size(), prefix) == 0 &&
            !claimed.count(col)) {
          out.push_back(col);
          claimed.insert(col);
        }
      }
    } else {
      out.push_back(pat);
      claimed.insert(pat);
    }
  }
  return out;
}

Dataset load_dataset(const Config& cfg) {
  const std::string path = cfg.get("data", "csv");
  const CsvTable table = read_csv(path);

  CsvSchema schema;
  schema.id_col = cfg.get_or("data", "id_col", "");
  std::set<std::string> claimed;
  if (!schema.id_col.empty()) claimed.insert(schema.id_col);
  const auto coord_pats = split_names(cfg.get_or("data", "coord_cols", "s1,s2"));
  schema.coord_cols = expand_columns(coord_pats, table.header, claimed);
  schema.covariate_cols = expand_columns(
      split_names(cfg.get_or("data", "covariate_cols", "")), table.header, claimed);
  schema.outcome_cols =
      expand_columns(split_names(cfg.get("data", "outcome_cols")), table.header, claimed);
  return ingest_csv(path, schema);
}

std::uint64_t config_seed(const Config& cfg) {
  return static_cast<std::uint64_t>(cfg.get_int("method", "seed", 0));
}

ForestParams forest_params(const Config& cfg, std::uint64_t seed) {
  ForestParams fp;
  fp.n_trees = static_cast<int>(cfg.get_int("predictor", "n_trees", 500));
  fp.mtry = static_cast<int>(cfg.get_int("predictor", "mtry", 0));
  fp.min_leaf = static_cast<int>(cfg.get_int("predictor", "min_leaf", 5));
  fp.seed = seed;
  return fp;
}

KernelSpec kernel_spec(const Config& cfg) {
  KernelSpec spec;
  spec.family = parse_kernel_family(cfg.get_or("method", "kernel", "linear"));
  spec.h = cfg.get_double("method", "kernel_h", 1.0);
  spec.validate();
  return spec;
}

MethodConfig method_config(const Config& cfg) {
  MethodConfig mc;
  mc.method = parse_method(cfg.get_or("method", "method", "rappca"));
  mc.r = static_cast<int>(cfg.get_int("method", "r", 3));
  if (mc.r < 1) throw ConfigError("config: r must be >= 1");
  mc.kernel = kernel_spec(cfg);
  mc.spline_m = static_cast<int>(cfg.get_int("method", "spline_m", 0));
  mc.standardize = cfg.get_bool("method", "standardize", true);
  mc.forest = forest_params(cfg, config_seed(cfg));

  const double delta = cfg.get_double("method", "delta", 0.05);
  const auto gammas = cfg.get_list("method", "gamma");
  const auto lambda1s = cfg.get_list("method", "lambda1");
  const auto lambda2s = cfg.get_list("method", "lambda2");
  const auto ratios = cfg.get_list("method", "ratio");
  const std::size_t len = std::max({gammas.size(), lambda1s.size(), lambda2s.size(),
                                    ratios.size(), std::size_t{1}});
  auto pick = [](const std::vector<double>& v, std::size_t i, double fallback) {
    if (v.empty()) return fallback;
    return v[std::min(i, v.size() - 1)];
  };
  for (std::size_t i = 0; i < len; ++i) {
    Hyperparams hp;
    hp.gamma = pick(gammas, i, 0.0);
    hp.lambda1 = pick(lambda1s, i, 0.0);
    if (!lambda2s.empty())
      hp.lambda2 = pick(lambda2s, i, 0.0);
    else
      hp.lambda2 = pick(ratios, i, 0.0) * hp.lambda1;
    hp.delta = delta;
    hp.validate();
    mc.hyper.push_back(hp);
  }
  return mc;
}

CVPlan cv_plan(const Config& cfg) {
  CVPlan plan;
  plan.k = static_cast<int>(cfg.get_int("method", "cv_k", 10));
  plan.metric = parse_cv_metric(cfg.get_or("method", "cv_metric", "tmse"));
  plan.seed = config_seed(cfg);
  return plan;
}

TuningGrid tuning_grid(const Config& cfg) {
  const std::string preset = cfg.get_or("grid", "preset", "default");
  TuningGrid grid;
  if (preset == "default") {
    grid = default_grid(false);
  } else if (preset == "default_extended") {
    grid = default_grid(true);
  } else {
    throw ConfigError("config: unknown grid preset '" + preset + "'");
  }
  if (cfg.has("grid", "gamma")) grid.gamma = cfg.get_list("grid", "gamma");
  if (cfg.has("grid", "lambda1")) grid.lambda1 = cfg.get_list("grid", "lambda1");
  if (cfg.has("grid", "ratio")) grid.ratio = cfg.get_list("grid", "ratio");
  if (cfg.has("grid", "kernel_h")) grid.kernel_h = cfg.get_list("grid", "kernel_h");
  grid.include_zero_combo = cfg.get_bool("grid", "include_zero", true);
  return grid;
}

std::string output_dir(const Config& cfg) { return cfg.get("output", "dir"); }

// ---------------------------------------------------------------------------
// Rendering helpers
// ---------------------------------------------------------------------------

std::string metrics_header(Index r) {
  std::string h = "row,tmse,mspe,msre_trn,msre_tst";
  for (Index l = 0; l < r; ++l) h += ",pc" + std::to_string(l + 1) + "_mse";
  return h + "\n";
}

std::string metrics_row(const std::string& label, const MetricsReport& rep) {
  std::string out = label;
  out += "," + format_double(rep.tmse);
  out += "," + format_double(rep.mspe);
  out += "," + format_double(rep.msre_trn);
  out += "," + format_double(rep.msre_tst);
  for (Index l = 0; l < rep.per_pc_mse.size(); ++l)
    out += "," + format_double(rep.per_pc_mse[l]);
  return out + "\n";
}

// ---------------------------------------------------------------------------
// Subcommand handlers
// ---------------------------------------------------------------------------

struct SimulateArgs {
  int scenario = 1;
  int replicates = 1;
  std::uint64_t seed = 0;
  std::string out;
  long n = 200, d = 10, p = 15;
  double noise_var = 0.1;
};

void run_simulate(const SimulateArgs& args) {
  std::vector<std::pair<std::string, std::string>> files;  // compute first, write last
  for (int rep = 0; rep < args.replicates; ++rep) {
    ScenarioConfig cfg;
    cfg.scenario = args.scenario;
    cfg.n = args.n;
    cfg.d = args.d;
    cfg.p = args.p;
    cfg.noise_var = args.noise_var;
    cfg.seed = derive_seed(args.seed, "replicate", static_cast<std::uint64_t>(rep));
    auto [data, truth] = gen_scenario(cfg);

    const fs::path dir = fs::path(args.out) / ("replicate_" + std::to_string(rep + 1));
    write_dataset_csv((dir / "data.csv").string(), data);
    std::vector<std::string> pc_cols;
    for (int l = 0; l < ScenarioConfig::n_pcs; ++l)
      pc_cols.push_back("pc" + std::to_string(l + 1));
    write_matrix_csv((dir / "truth_pc.csv").string(), truth.pc, pc_cols, data.ids);
    write_matrix_csv((dir / "truth_f.csv").string(), truth.f, pc_cols, data.ids);
    write_matrix_csv((dir / "truth_mixing.csv").string(), truth.mixing, data.y_names);
    write_matrix_csv((dir / "truth_sigma.csv").string(), truth.sigma, data.ids);

    std::string meta;
    meta += "scenario = " + std::to_string(cfg.scenario) + "\n";
    meta += "n = " + std::to_string(cfg.n) + "\n";
    meta += "d = " + std::to_string(cfg.d) + "\n";
    meta += "p = " + std::to_string(cfg.p) + "\n";
    meta += "n_pcs = " + std::to_string(ScenarioConfig::n_pcs) + "\n";
    meta += "noise_var = " + format_double(cfg.noise_var) + "\n";
    meta += "cov_range = " + format_double(cfg.cov_range) + "\n";
    meta += "cov_sill_spatial = " + format_double(cfg.cov_sill_spatial) + "\n";
    meta += "cov_sill_const = " + format_double(cfg.cov_sill_const) + "\n";
    meta += "decay_hi = " + format_double(cfg.decay_hi) + "\n";
    meta += "decay_lo = " + format_double(cfg.decay_lo) + "\n";
    meta += "decay_rule = linear row-norm decay (scenario 2 only), common norm sqrt(p/3)\n";
    meta += "base_seed = " + std::to_string(args.seed) + "\n";
    meta += "replicate = " + std::to_string(rep + 1) + "\n";
    meta += "replicate_seed = " + std::to_string(cfg.seed) + "\n";
    atomic_write((dir / "metadata.txt").string(), meta);
  }
  (void)files;
  write_manifest(args.out, "simulate", args.seed,
                 {{"scenario", std::to_string(args.scenario)},
                  {"replicates", std::to_string(args.replicates)}});
  std::cout << "simulate: wrote " << args.replicates << " replicate(s) to " << args.out << "\n";
}

void run_fit(const std::string& config_path) {
  const Config cfg = parse_config_file(config_path);
  const Dataset data = load_dataset(cfg);
  const MethodConfig mc = method_config(cfg);
  const PCModel model = fit_method(data, mc);
  const std::string dir = output_dir(cfg);
  save_model(dir, model, data, config_seed(cfg), config_hash(cfg));
  std::cout << "fit: " << to_string(mc.method) << " with r=" << mc.r << " written to " << dir
            << "\n";
}

void run_predict(const std::string& model_dir, const std::string& locations_path,
                 const std::string& out_path, int n_trees) {
  const LoadedModel loaded = load_model(model_dir);
  const PCModel& model = loaded.model;

  // The locations file must carry the coordinate columns and the model's
  // covariate columns, matched by name against features.csv.
  const CsvTable features_hdr = read_csv((fs::path(model_dir) / "features.csv").string());
  CsvSchema schema;
  schema.id_col = "";
  schema.coord_cols = {features_hdr.header[1], features_hdr.header[2]};
  for (std::size_t j = 3; j < features_hdr.header.size(); ++j)
    schema.covariate_cols.push_back(features_hdr.header[j]);

  const CsvTable loc_table = read_csv(locations_path);
  auto need = [&](const std::string& name) {
    const Index j = loc_table.find_column(name);
    if (j < 0) throw DataError("locations file: missing column '" + name + "'");
    return j;
  };
  const Index n_new = static_cast<Index>(loc_table.rows.size());
  Matrix coords_new(n_new, 2);
  Matrix X_new(n_new, static_cast<Index>(schema.covariate_cols.size()));
  const Index id_col = loc_table.find_column("id");
  std::vector<std::string> ids;
  for (Index i = 0; i < n_new; ++i) {
    const auto& row = loc_table.rows[static_cast<std::size_t>(i)];
    ids.push_back(id_col >= 0 ? row[static_cast<std::size_t>(id_col)] : std::to_string(i + 1));
    for (int c = 0; c < 2; ++c) {
      const Index j = need(schema.coord_cols[static_cast<std::size_t>(c)]);
      coords_new(i, c) = std::strtod(row[static_cast<std::size_t>(j)].c_str(), nullptr);
    }
    for (std::size_t c = 0; c < schema.covariate_cols.size(); ++c) {
      const Index j = need(schema.covariate_cols[c]);
      X_new(i, static_cast<Index>(c)) =
          std::strtod(row[static_cast<std::size_t>(j)].c_str(), nullptr);
    }
  }
  require_finite(coords_new, "predict locations");
  if (X_new.cols() > 0) require_finite(X_new, "predict covariates");

  const Index r = model.r();
  Matrix U_hat(n_new, r);
  bool extrapolated = false;
  for (Index l = 0; l < r; ++l) {
    ForestParams fp;
    fp.n_trees = n_trees;
    fp.seed = derive_seed(loaded.seed, "predict", static_cast<std::uint64_t>(l));
    const TwoStepResult res = two_step_fit_predict(loaded.coords, loaded.X,
                                                   model.U_train.col(l), coords_new, X_new, fp);
    U_hat.col(l) = res.predictions;
    extrapolated = extrapolated || res.extrapolation;
  }
  if (extrapolated)
    std::cerr << "predict: some locations fall outside the training bounding box "
                 "(extrapolation)\n";

  const Matrix Y_hat = unstandardize(U_hat * model.V.transpose(), model.y_stats);

  std::string out = "id";
  for (Index l = 0; l < r; ++l) out += ",pc" + std::to_string(l + 1) + "_hat";
  for (Index j = 0; j < model.p(); ++j) out += ",yhat" + std::to_string(j + 1);
  out += "\n";
  for (Index i = 0; i < n_new; ++i) {
    out += ids[static_cast<std::size_t>(i)];
    for (Index l = 0; l < r; ++l) out += "," + format_double(U_hat(i, l));
    for (Index j = 0; j < model.p(); ++j) out += "," + format_double(Y_hat(i, j));
    out += "\n";
  }
  atomic_write(out_path, out);
  std::cout << "predict: wrote " << n_new << " locations to " << out_path << "\n";
}

void run_evaluate(const std::string& config_path) {
  const Config cfg = parse_config_file(config_path);
  const Dataset data = load_dataset(cfg);
  const MethodConfig mc = method_config(cfg);
  const CVPlan plan = cv_plan(cfg);
  const EvaluationResult result = evaluate_cv(data, mc, plan);

  const Index r = result.mean.per_pc_mse.size();
  std::string folds_csv = metrics_header(r);
  for (std::size_t f = 0; f < result.per_fold.size(); ++f)
    folds_csv += metrics_row("fold" + std::to_string(f + 1), result.per_fold[f]);
  std::string summary_csv = metrics_header(r);
  summary_csv += metrics_row("mean", result.mean);
  summary_csv += metrics_row("sd", result.sd);

  const std::string dir = output_dir(cfg);
  atomic_write((fs::path(dir) / "metrics_folds.csv").string(), folds_csv);
  atomic_write((fs::path(dir) / "metrics_summary.csv").string(), summary_csv);
  write_manifest(dir, config_hash(cfg), plan.seed,
                 {{"command", "evaluate"}, {"method", to_string(mc.method)}});
  std::cout << "evaluate: " << to_string(mc.method) << " mean TMSE "
            << format_double(result.mean.tmse) << ", MSPE " << format_double(result.mean.mspe)
            << ", MSRE-trn " << format_double(result.mean.msre_trn) << " -> " << dir << "\n";
}

void run_tune(const std::string& config_path) {
  const Config cfg = parse_config_file(config_path);
  const Dataset data = load_dataset(cfg);
  const CVPlan plan = cv_plan(cfg);
  const int r = static_cast<int>(cfg.get_int("method", "r", 3));

  TuneSettings settings;
  settings.kernel = kernel_spec(cfg);
  settings.spline_m = static_cast<int>(cfg.get_int("method", "spline_m", 0));
  settings.forest = forest_params(cfg, plan.seed);
  settings.delta = cfg.get_double("method", "delta", 0.05);
  const TuningGrid grid = tuning_grid(cfg);

  SequentialTuner tuner(data, settings, grid, plan);
  std::string table_csv = "component,gamma,lambda1,ratio,kernel_h,fold,score\n";
  std::string selected_csv = "component,gamma,lambda1,lambda2,kernel_h,score\n";
  for (int l = 1; l <= r; ++l) {
    const ComponentTuneResult result = tuner.tune_next();
    for (const auto& row : result.table) {
      table_csv += std::to_string(l) + "," + format_double(row.gamma) + "," +
                   format_double(row.lambda1) + "," + format_double(row.ratio) + "," +
                   format_double(row.kernel_h) + "," + std::to_string(row.fold) + "," +
                   format_double(row.score) + "\n";
    }
    selected_csv += std::to_string(l) + "," + format_double(result.best.gamma) + "," +
                    format_double(result.best.lambda1) + "," +
                    format_double(result.best.lambda2) + "," +
                    format_double(result.best_kernel_h) + "," +
                    format_double(result.best_score) + "\n";
    std::cout << "tune: component " << l << " -> gamma=" << format_double(result.best.gamma)
              << " lambda1=" << format_double(result.best.lambda1)
              << " lambda2=" << format_double(result.best.lambda2) << " score "
              << format_double(result.best_score) << "\n";
  }

  const std::string dir = output_dir(cfg);
  atomic_write((fs::path(dir) / "score_table.csv").string(), table_csv);
  atomic_write((fs::path(dir) / "selected.csv").string(), selected_csv);
  save_model((fs::path(dir) / "model").string(), tuner.model(), data, plan.seed,
             config_hash(cfg));
  write_manifest(dir, config_hash(cfg), plan.seed, {{"command", "tune"}});
}

void run_rank_curves(const std::string& config_path, int r_max) {
  const Config cfg = parse_config_file(config_path);
  const Dataset data = load_dataset(cfg);
  const MethodConfig mc = method_config(cfg);
  const CVPlan plan = cv_plan(cfg);
  const RankCurveTable table = rank_curves(data, mc, r_max, plan);

  std::string out = "l,cum_pred_mse,msre_trn\n";
  for (const auto& pt : table.points)
    out += std::to_string(pt.l) + "," + format_double(pt.cum_pred_mse) + "," +
           format_double(pt.msre_trn) + "\n";
  const std::string dir = output_dir(cfg);
  atomic_write((fs::path(dir) / "rank_curves.csv").string(), out);
  write_manifest(dir, config_hash(cfg), plan.seed,
                 {{"command", "rank-curves"}, {"knee", std::to_string(table.knee)}});
  std::cout << "rank-curves: wrote " << table.points.size() << " rows, advisory knee at l="
            << table.knee << "\n";
}

int run_verify_optimality(const std::string& config_path, int theta_grid) {
  const Config cfg = parse_config_file(config_path);
  const Dataset data = load_dataset(cfg);
  const KernelSpec kernel = kernel_spec(cfg);
  const double delta = cfg.get_double("method", "delta", 0.05);
  const int m = static_cast<int>(
      std::min<long>(cfg.get_int("method", "spline_m", 0) > 0
                         ? cfg.get_int("method", "spline_m", 0)
                         : 200,
                     data.n()));

  struct Combo {
    double gamma, lambda1, ratio;
  };
  std::vector<Combo> combos;
  if (cfg.has("verify", "gamma") || cfg.has("verify", "lambda1") || cfg.has("verify", "ratio")) {
    auto gammas = cfg.get_list("verify", "gamma");
    auto lambda1s = cfg.get_list("verify", "lambda1");
    auto ratios = cfg.get_list("verify", "ratio");
    if (gammas.empty()) gammas = {1.0};
    if (lambda1s.empty()) lambda1s = {1.0};
    if (ratios.empty()) ratios = {1.0};
    for (double g : gammas)
      for (double l1 : lambda1s)
        for (double rr : ratios) combos.push_back({g, l1, rr});
  } else {
    // Defaults mirror the appendix sweeps: lambda1 = lambda2 over {0.1, 1, 5}
    // and lambda1 = 1 with ratio over {0.25, 1, 4}.
    for (double t : {0.1, 1.0, 5.0}) combos.push_back({1.0, t, 1.0});
    for (double rr : {0.25, 4.0}) combos.push_back({1.0, 1.0, rr});
  }

  const ColumnStats y_stats = column_stats(data.Y);
  const ColumnStats x_stats =
      data.d() > 0 ? column_stats(data.X, false) : ColumnStats::identity(0);
  const Matrix Ys = standardize(data.Y, y_stats);
  const Matrix Xs = standardize(data.X, x_stats);
  const Matrix K = kernel_matrix(kernel, Xs);
  const SplineBasis basis = build_tprs(data.coords, m);

  std::string curves = "gamma,lambda1,lambda2,theta,diff\n";
  std::string summary = "gamma,lambda1,lambda2,min_diff,max_diff,pass\n";
  bool all_pass = true;
  for (const auto& combo : combos) {
    Hyperparams hp;
    hp.gamma = combo.gamma;
    hp.lambda1 = combo.lambda1;
    hp.lambda2 = combo.ratio * combo.lambda1;
    hp.delta = delta;
    const PCComponent comp = rappca_solve_component(Ys, K, basis.B, basis.Q, hp);
    const Vector diffs =
        polar_perturbation_check(Ys, comp, K, basis.B, basis.Q, hp, theta_grid);
    const double theta0 = std::atan2(comp.v[0], comp.v[1]);
    for (int g = 0; g < theta_grid; ++g) {
      double theta = std::fmod(theta0 + 2.0 * M_PI * g / theta_grid, 2.0 * M_PI);
      if (theta < 0) theta += 2.0 * M_PI;
      curves += format_double(hp.gamma) + "," + format_double(hp.lambda1) + "," +
                format_double(hp.lambda2) + "," + format_double(theta) + "," +
                format_double(diffs[g]) + "\n";
    }
    const double mn = diffs.minCoeff();
    const double mx = diffs.maxCoeff();
    const bool pass = mn >= -1e-8 && mn <= 1e-6;
    all_pass = all_pass && pass;
    summary += format_double(hp.gamma) + "," + format_double(hp.lambda1) + "," +
               format_double(hp.lambda2) + "," + format_double(mn) + "," + format_double(mx) +
               "," + (pass ? "1" : "0") + "\n";
    std::cout << "verify-optimality: gamma=" << format_double(hp.gamma)
              << " lambda1=" << format_double(hp.lambda1)
              << " lambda2=" << format_double(hp.lambda2) << " min diff " << format_double(mn)
              << (pass ? " PASS" : " FAIL") << "\n";
  }

  const std::string dir = output_dir(cfg);
  atomic_write((fs::path(dir) / "optimality_curves.csv").string(), curves);
  atomic_write((fs::path(dir) / "optimality_summary.csv").string(), summary);
  write_manifest(dir, config_hash(cfg), config_seed(cfg),
                 {{"command", "verify-optimality"},
                  {"theta_grid", std::to_string(theta_grid)},
                  {"all_pass", all_pass ? "1" : "0"}});
  if (!all_pass) {
    std::cerr << "verify-optimality: at least one perturbation curve dips below -1e-8\n";
    return 4;
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Dimension reduction for spatial data: classical, predictive and RapPCA "
               "engines with tuning, evaluation and simulation pipelines"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic scenario data");
  simulate->add_option("--scenario", sim.scenario, "Scenario 1, 2 or 3")
      ->check(CLI::Range(1, 3));
  simulate->add_option("--replicates", sim.replicates, "Number of replicates")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Base seed");
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--n", sim.n, "Locations per replicate");
  simulate->add_option("--d", sim.d, "Number of covariates");
  simulate->add_option("--p", sim.p, "Number of outcomes");
  simulate->add_option("--noise-var", sim.noise_var, "Outcome noise variance");

  std::string config_path;
  auto* fit = app.add_subcommand("fit", "Fit a dimension-reduction model");
  fit->add_option("--config", config_path, "Config file")->required();

  std::string model_dir, locations_path, out_path;
  int predict_trees = 500;
  auto* predict = app.add_subcommand("predict", "Predict PC scores at new locations");
  predict->add_option("--model", model_dir, "Model bundle directory")->required();
  predict->add_option("--locations", locations_path, "CSV of new locations")->required();
  predict->add_option("--out", out_path, "Output CSV")->required();
  predict->add_option("--n-trees", predict_trees, "Forest size for the score predictor");

  auto* evaluate = app.add_subcommand("evaluate", "K-fold evaluation of a method");
  evaluate->add_option("--config", config_path, "Config file")->required();

  auto* tune = app.add_subcommand("tune", "Sequential per-component hyperparameter search");
  tune->add_option("--config", config_path, "Config file")->required();

  int rmax = 0;
  auto* rank = app.add_subcommand("rank-curves", "Rank-selection elbow curves");
  rank->add_option("--config", config_path, "Config file")->required();
  rank->add_option("--rmax", rmax, "Maximum number of components")->required();

  int theta_grid = 360;
  auto* verify = app.add_subcommand("verify-optimality",
                                    "Polar-coordinate optimality verification curves");
  verify->add_option("--config", config_path, "Config file")->required();
  verify->add_option("--theta-grid", theta_grid, "Number of grid points on [0, 2pi)");

  std::vector<const char*> argv;
  argv.push_back("rappca");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) {
      run_simulate(sim);
    } else if (fit->parsed()) {
      run_fit(config_path);
    } else if (predict->parsed()) {
      run_predict(model_dir, locations_path, out_path, predict_trees);
    } else if (evaluate->parsed()) {
      run_evaluate(config_path);
    } else if (tune->parsed()) {
      run_tune(config_path);
    } else if (rank->parsed()) {
      run_rank_curves(config_path, rmax);
    } else if (verify->parsed()) {
      return run_verify_optimality(config_path, theta_grid);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace rappca
