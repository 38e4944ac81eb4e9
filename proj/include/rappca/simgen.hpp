#pragma once

#include <cstdint>
#include <utility>

#include "rappca/data.hpp"
#include "rappca/rng.hpp"

namespace rappca {

/// Configuration for the three synthetic scenarios: locations uniform on the
/// unit square, d covariates uniform on [-1, 1], six latent PCs mixed into p
/// outcomes with additive noise.
///
/// Scenario 1: PCs 1-3 linear in X and noiseless; PCs 4-6 pure spatial
///             Gaussian fields; mixing rows comparable in size.
/// Scenario 2: as 1, but mixing row norms decay linearly from decay_hi to
///             decay_lo across the six PCs.
/// Scenario 3: as 1, but PCs 1-3 use squared covariates plus pairwise
///             interactions of consecutive covariates.
struct ScenarioConfig {
  int scenario = 1;
  Index n = 200;
  Index d = 10;
  Index p = 15;
  double noise_var = 0.1;   // variance of the entrywise outcome noise
  double cov_range = 0.5;   // exponential covariance length scale
  double cov_sill_spatial = 0.5;
  double cov_sill_const = 0.5;
  double decay_hi = 1.0;        // scenario 2 first-row norm factor
  double decay_lo = 1.0 / 6.0;  // scenario 2 last-row norm factor
  std::uint64_t seed = 0;

  static constexpr int n_pcs = 6;

  void validate() const;
};

/// Ground truth retained for oracle-based tests. pc columns are scaled to unit
/// sample standard deviation, so Y = pc * mixing + noise.
struct SimTruth {
  Matrix pc;      // n x 6 scaled true scores
  Matrix mixing;  // 6 x p
  Matrix f;       // n x 6 mean-function values (pre-scaling)
  Matrix sigma;   // n x n spatial covariance
};

/// Sigma(i,i') = sill_spatial * exp(-(squared distance)/range) + sill_const.
Matrix exp_cov(const Matrix& coords, double range = 0.5, double sill_spatial = 0.5,
               double sill_const = 0.5);

/// Reusable symmetric factorization of a PSD covariance (eigen-based, clipping
/// small negative eigenvalues; indefinite beyond tolerance is a NumericError).
class MvnSampler {
 public:
  explicit MvnSampler(const Matrix& sigma);
  Vector sample(Rng& rng) const;

 private:
  Matrix factor_;  // sigma = factor * factor'
};

/// One draw from N(0, sigma) using the given seed.
Vector sample_mvn(const Matrix& sigma, std::uint64_t seed);

std::pair<Dataset, SimTruth> gen_scenario(const ScenarioConfig& cfg);

}  // namespace rappca
