#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "trimest/bootstrap.hpp"
#include "trimest/dgp.hpp"
#include "trimest/estimator.hpp"
#include "trimest/types.hpp"
#include "trimest/variance.hpp"

namespace trimest {

/// One covariance estimator requested from the harness: a plug-in bread
/// variant (TLS) or the robust bootstrap (TLAD).
struct McVarianceMethod {
  bool is_bootstrap = false;
  BreadVariant bread = BreadVariant::Midpoint;

  std::string name() const;
};

struct McConfig {
  DgpSpec dgp;
  int reps = 100;
  LossKind loss = LossKind::TLS;
  std::vector<McVarianceMethod> variance_methods;
  double ci_level = 0.95;
  std::uint64_t seed = 0;
  int threads = 1;
  int histogram_bins = 50;
  // bootstrap settings used when a bootstrap method is requested
  int bootstrap_b = 500;
  double bootstrap_quantile_level = 0.9;
  bool bootstrap_psd = false;
  FitConfig fit_config;

  void validate() const;
};

McConfig mc_config_from_json(const nlohmann::json& j);
nlohmann::json mc_config_to_json(const McConfig& config);

struct Histogram {
  Eigen::VectorXd edges;   // bins + 1 entries
  Eigen::VectorXi counts;  // bins entries
  double overlay_mean = 0.0;
  double overlay_sd = 0.0;  // maximum-likelihood (1/n) standard deviation
};

/// Equal-width histogram over [min, max] with a Gaussian-MLE overlay.
Histogram emit_histogram(const std::vector<double>& values, int bins);

struct NormalityReport {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ks_statistic = 0.0;  // vs the fitted Gaussian
  int n = 0;
};

/// Report-only moments and KS distance against the fitted Gaussian.
NormalityReport normality_diagnostic(const std::vector<double>& values);

struct McMethodTrack {
  McVarianceMethod method;
  std::vector<Matrix> sigma;   // per replication
  std::vector<Matrix> bread;   // plug-in methods only
  Matrix ci_hit;               // reps x K, 0/1 (NaN on failed rep)
  std::vector<double> r_norm;  // h92 only: norm of the equality part
  Eigen::VectorXd coverage;    // per component
  Matrix mean_bread;
  double mean_r_norm = 0.0;
};

struct McResult {
  McConfig config;
  int failures = 0;
  std::vector<char> rep_ok;
  Matrix theta_hats;    // reps x K
  Matrix scaled_devs;   // sqrt(n) (theta_hat - theta0), reps x K
  std::vector<McMethodTrack> methods;
  Eigen::VectorXd mean_theta;
  Eigen::VectorXd sd_theta;
  std::vector<double> scaled_column(int j) const;  // successful reps only
};

/// Thrown when more than 5% of replications fail.
struct McAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Replicated simulate/fit/variance experiment; bit-identical output for any
/// thread count (counter-based substreams, index-ordered aggregation).
McResult run_mc(const McConfig& config);

/// Write per-replication CSV and summary JSON named by the config hash;
/// returns {csv_path, json_path}.
std::pair<std::string, std::string> write_mc_outputs(const McResult& result,
                                                     const std::string& dir);

nlohmann::json mc_summary_json(const McResult& result);

}  // namespace trimest
