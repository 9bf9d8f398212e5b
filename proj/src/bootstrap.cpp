#include "trimest/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "trimest/math.hpp"

namespace trimest {

void BootstrapConfig::validate() const {
  if (b < 1) throw std::invalid_argument("bootstrap b must be >= 1");
  if (!(quantile_level > 0.0 && quantile_level < 1.0)) {
    throw std::invalid_argument("quantile_level must lie in (0,1)");
  }
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  fit_config.validate();
}

PanelDataset resample(const PanelDataset& data, Rng& rng) {
  const int n = data.n();
  const int k = data.k();
  Eigen::VectorXd y1(n), y2(n);
  Matrix x1(n, k), x2(n, k);
  for (int i = 0; i < n; ++i) {
    const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
    y1[i] = data.y1()[j];
    y2[i] = data.y2()[j];
    x1.row(i) = data.x1().row(j);
    x2.row(i) = data.x2().row(j);
  }
  return PanelDataset(std::move(y1), std::move(y2), std::move(x1),
                      std::move(x2));
}

double empirical_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: no values");
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("quantile level must lie in (0,1)");
  }
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  std::size_t idx = static_cast<std::size_t>(
      std::ceil(level * static_cast<double>(m)));
  if (idx < 1) idx = 1;
  if (idx > m) idx = m;
  return values[idx - 1];
}

RobustSigmaResult assemble_robust_sigma(const ParamVector& theta_hat,
                                        const Matrix& replicates, int n,
                                        double quantile_level) {
  const int k = static_cast<int>(theta_hat.size());
  if (replicates.cols() != k) {
    throw std::invalid_argument("replicate matrix has wrong width");
  }
  const int b = static_cast<int>(replicates.rows());
  if (b < 1) throw std::invalid_argument("no bootstrap replicates");
  const double root_n = std::sqrt(static_cast<double>(n));
  const double z = normal_quantile(0.5 * (1.0 + quantile_level));

  RobustSigmaResult out;
  out.sigma_hat = Matrix::Zero(k, k);
  out.diag_quantiles = Eigen::VectorXd::Zero(k);
  out.cross_quantiles = Matrix::Zero(k, k);
  out.replications_used = b;

  std::vector<double> devs(b);
  for (int j = 0; j < k; ++j) {
    for (int r = 0; r < b; ++r) {
      devs[r] = root_n * std::fabs(replicates(r, j) - theta_hat[j]);
    }
    const double q = empirical_quantile(devs, quantile_level);
    out.diag_quantiles[j] = q;
    out.sigma_hat(j, j) = (q / z) * (q / z);
  }
  for (int j = 0; j < k; ++j) {
    for (int l = j + 1; l < k; ++l) {
      for (int r = 0; r < b; ++r) {
        devs[r] = root_n * std::fabs(replicates(r, j) + replicates(r, l) -
                                     theta_hat[j] - theta_hat[l]);
      }
      const double q = empirical_quantile(devs, quantile_level);
      out.cross_quantiles(j, l) = q;
      out.cross_quantiles(l, j) = q;
      const double off = 0.5 * ((q / z) * (q / z) - out.sigma_hat(j, j) -
                                out.sigma_hat(l, l));
      out.sigma_hat(j, l) = off;
      out.sigma_hat(l, j) = off;
    }
  }
  return out;
}

RobustSigmaResult robust_sigma_tlad(const PanelDataset& data,
                                    const ParamVector& theta_hat,
                                    const BootstrapConfig& config) {
  config.validate();
  if (theta_hat.size() != data.k()) {
    throw std::invalid_argument("theta_hat dimension mismatch");
  }
  const int b = config.b;
  const int k = data.k();

  FitConfig refit = config.fit_config;
  refit.initial_theta = theta_hat;  // replicates live near theta_hat
  refit.restarts = 0;

  Matrix replicates(b, k);
  std::vector<char> ok(b, 0);

  Rng base(config.seed, 0);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= b) return;
      Rng stream = base.substream(static_cast<std::uint64_t>(r) + 1);
      const PanelDataset boot = resample(data, stream);
      try {
        const FitResult fr = fit(boot, LossKind::TLAD, refit);
        if (fr.converged && !fr.flat) {
          replicates.row(r) = fr.theta_hat;
          ok[r] = 1;
        }
      } catch (const std::exception&) {
        // dropped replicate, accounted below
      }
    }
  };

  if (config.threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < config.threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  int kept = 0;
  Matrix used(b, k);
  for (int r = 0; r < b; ++r) {
    if (ok[r]) used.row(kept++) = replicates.row(r);
  }
  const int dropped = b - kept;
  if (dropped * 10 > b) {
    throw std::runtime_error(
        "robust_sigma_tlad: " + std::to_string(dropped) + " of " +
        std::to_string(b) + " bootstrap fits failed to converge");
  }

  RobustSigmaResult out = assemble_robust_sigma(
      theta_hat, used.topRows(kept), data.n(), config.quantile_level);
  out.replications_used = kept;
  out.replications_dropped = dropped;
  if (config.psd_project) {
    out.sigma_hat = psd_project(out.sigma_hat);
    out.psd_projected = true;
  }
  return out;
}

Matrix psd_project(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("psd_project: matrix must be square");
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("psd_project: matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace trimest
