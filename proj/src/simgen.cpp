#include "rappca/simgen.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "rappca/common.hpp"

namespace rappca {

void ScenarioConfig::validate() const {
  if (scenario < 1 || scenario > 3) throw ConfigError("scenario must be 1, 2 or 3");
  if (n < 8) throw ConfigError("scenario: n must be at least 8");
  if (d < 1) throw ConfigError("scenario: d must be at least 1");
  if (p < 1) throw ConfigError("scenario: p must be at least 1");
  if (noise_var < 0) throw ConfigError("scenario: noise variance must be nonnegative");
  if (cov_range <= 0) throw ConfigError("scenario: covariance range must be positive");
}

Matrix exp_cov(const Matrix& coords, double range, double sill_spatial, double sill_const) {
  if (coords.cols() != 2) throw DataError("exp_cov: coords must be n x 2");
  require_finite(coords, "exp_cov");
  const Index n = coords.rows();
  Matrix sigma(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) {
      const double sq = (coords.row(i) - coords.row(j)).squaredNorm();
      const double v = sill_spatial * std::exp(-sq / range) + sill_const;
      sigma(i, j) = v;
      sigma(j, i) = v;
    }
  }
  return sigma;
}

MvnSampler::MvnSampler(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols()) throw DataError("MvnSampler: sigma must be square");
  if (!sigma.isApprox(sigma.transpose(), 1e-12))
    throw DataError("MvnSampler: sigma must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  if (eig.info() != Eigen::Success) throw NumericError("MvnSampler: eigendecomposition failed");
  Vector evals = eig.eigenvalues();
  const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
  if (evals.minCoeff() < -1e-10 * scale)
    throw NumericError("MvnSampler: sigma is indefinite beyond tolerance");
  evals = evals.cwiseMax(0.0);
  factor_ = eig.eigenvectors() * evals.cwiseSqrt().asDiagonal();
}

Vector MvnSampler::sample(Rng& rng) const {
  Vector z(factor_.cols());
  for (Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return factor_ * z;
}

Vector sample_mvn(const Matrix& sigma, std::uint64_t seed) {
  MvnSampler sampler(sigma);
  Rng rng(seed);
  return sampler.sample(rng);
}

namespace {

double sample_sd(const Vector& x) {
  const double mean = x.mean();
  return std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size() - 1));
}

}  // namespace

std::pair<Dataset, SimTruth> gen_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  constexpr int kPcs = ScenarioConfig::n_pcs;
  const Index n = cfg.n;
  const Index d = cfg.d;
  const Index p = cfg.p;

  // Locations uniform on the unit square; exact duplicates are resampled to
  // keep the TPRS construction well-posed.
  Matrix coords(n, 2);
  {
    Rng rng(derive_seed(cfg.seed, "locations"));
    for (Index i = 0; i < n; ++i) {
      bool fresh = false;
      while (!fresh) {
        coords(i, 0) = rng.uniform();
        coords(i, 1) = rng.uniform();
        fresh = true;
        for (Index j = 0; j < i; ++j) {
          if (coords(j, 0) == coords(i, 0) && coords(j, 1) == coords(i, 1)) {
            fresh = false;
            break;
          }
        }
      }
    }
  }

  Matrix X(n, d);
  {
    Rng rng(derive_seed(cfg.seed, "covariates"));
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j) X(i, j) = rng.uniform(-1.0, 1.0);
  }

  SimTruth truth;
  truth.sigma = exp_cov(coords, cfg.cov_range, cfg.cov_sill_spatial, cfg.cov_sill_const);
  const MvnSampler mvn(truth.sigma);

  // Latent PCs: the first three have a covariate-driven mean and no spatial
  // noise, the last three are pure spatial Gaussian fields.
  truth.f = Matrix::Zero(n, kPcs);
  Matrix pc(n, kPcs);
  for (int l = 0; l < kPcs; ++l) {
    if (l < 3) {
      Rng rng(derive_seed(cfg.seed, "mean_coef", static_cast<std::uint64_t>(l)));
      if (cfg.scenario == 3) {
        Vector beta(d);
        for (Index j = 0; j < d; ++j) beta[j] = rng.uniform(-1.0, 1.0);
        const Index pairs = d / 2;
        Vector alpha(pairs);
        for (Index j = 0; j < pairs; ++j) alpha[j] = rng.uniform(-1.0, 1.0);
        truth.f.col(l) = X.array().square().matrix() * beta;
        for (Index j = 0; j < pairs; ++j)
          truth.f.col(l) +=
              2.0 * alpha[j] * (X.col(2 * j).array() * X.col(2 * j + 1).array()).matrix();
      } else {
        Vector beta(d);
        for (Index j = 0; j < d; ++j) beta[j] = rng.uniform(-1.0, 1.0);
        truth.f.col(l) = X * beta;
      }
      pc.col(l) = truth.f.col(l);  // sigma_l^2 = 0
    } else {
      Rng rng(derive_seed(cfg.seed, "pc_noise", static_cast<std::uint64_t>(l)));
      pc.col(l) = mvn.sample(rng);  // sigma_l^2 = 1
    }
  }

  // Scale the PCs to unit sample standard deviation.
  truth.pc.resize(n, kPcs);
  for (int l = 0; l < kPcs; ++l) {
    const double sd = sample_sd(pc.col(l));
    if (sd == 0.0) throw NumericError("gen_scenario: degenerate PC with zero variance");
    truth.pc.col(l) = pc.col(l) / sd;
  }

  // Mixing weights; scenario 2 rescales rows to a common norm with linearly
  // decaying factors so earlier PCs contribute more.
  truth.mixing.resize(kPcs, p);
  {
    Rng rng(derive_seed(cfg.seed, "mixing"));
    for (int l = 0; l < kPcs; ++l)
      for (Index j = 0; j < p; ++j) truth.mixing(l, j) = rng.uniform(-1.0, 1.0);
    if (cfg.scenario == 2) {
      const double base_norm = std::sqrt(static_cast<double>(p) / 3.0);
      for (int l = 0; l < kPcs; ++l) {
        const double decay =
            cfg.decay_hi + (cfg.decay_lo - cfg.decay_hi) * l / (kPcs - 1.0);
        const double norm = truth.mixing.row(l).norm();
        if (norm == 0.0) throw NumericError("gen_scenario: zero mixing row");
        truth.mixing.row(l) *= base_norm * decay / norm;
      }
    }
  }

  Dataset data;
  data.coords = coords;
  data.X = X;
  data.Y = truth.pc * truth.mixing;
  {
    Rng rng(derive_seed(cfg.seed, "noise"));
    const double sd = std::sqrt(cfg.noise_var);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j) data.Y(i, j) += sd * rng.normal();
  }

  data.ids.reserve(n);
  for (Index i = 0; i < n; ++i) data.ids.push_back(std::to_string(i + 1));
  data.x_names.reserve(d);
  for (Index j = 0; j < d; ++j) data.x_names.push_back("x" + std::to_string(j + 1));
  data.y_names.reserve(p);
  for (Index j = 0; j < p; ++j) data.y_names.push_back("y" + std::to_string(j + 1));
  return {std::move(data), std::move(truth)};
}

}  // namespace rappca
