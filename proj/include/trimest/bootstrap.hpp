#pragma once

#include <cstdint>
#include <vector>

#include "trimest/estimator.hpp"
#include "trimest/rng.hpp"
#include "trimest/types.hpp"

namespace trimest {

struct BootstrapConfig {
  int b = 500;                  // bootstrap replications
  double quantile_level = 0.9;  // on absolute deviations; paired normal
                                // level is (1 + quantile_level) / 2
  std::uint64_t seed = 0;
  bool psd_project = false;
  FitConfig fit_config;
  int threads = 1;

  void validate() const;
};

struct RobustSigmaResult {
  Matrix sigma_hat;
  /// Diagonal quantiles q_{level,k} of sqrt(n)|theta~_k - theta^_k|.
  Eigen::VectorXd diag_quantiles;
  /// Pairwise quantiles q_{level,j,k} for j < k, row-major upper triangle.
  Matrix cross_quantiles;
  bool psd_projected = false;
  int replications_used = 0;
  int replications_dropped = 0;
};

/// Draw-with-replacement copy of the dataset, same size; deterministic
/// given the stream.
PanelDataset resample(const PanelDataset& data, Rng& rng);

/// Empirical quantile as the order statistic at index ceil(level * m)
/// (inverted CDF, no interpolation).
double empirical_quantile(std::vector<double> values, double level);

/// Quantile-based covariance assembly from centered bootstrap estimates:
/// sigma_kk = (q_{level,k} / z)^2 and
/// sigma_jk = ((q_{level,j,k} / z)^2 - sigma_jj - sigma_kk) / 2, with
/// z the (1+level)/2 standard normal quantile. `replicates` holds one
/// bootstrap theta~ per row.
RobustSigmaResult assemble_robust_sigma(const ParamVector& theta_hat,
                                        const Matrix& replicates, int n,
                                        double quantile_level);

/// Robust bootstrap covariance for TLAD: refit on resamples (warm-started
/// at theta_hat), drop non-converged or flat replicates (error when more
/// than 10% drop), then assemble from quantiles.
RobustSigmaResult robust_sigma_tlad(const PanelDataset& data,
                                    const ParamVector& theta_hat,
                                    const BootstrapConfig& config);

/// Nearest positive semidefinite matrix in Frobenius norm: eigendecompose,
/// clip negative eigenvalues, reassemble.
Matrix psd_project(const Matrix& m);

}  // namespace trimest
