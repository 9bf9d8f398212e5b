#include "trimest/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "trimest/json_io.hpp"
#include "trimest/math.hpp"

namespace trimest {

std::string McVarianceMethod::name() const {
  return is_bootstrap ? "bootstrap" : to_string(bread);
}

void McConfig::validate() const {
  dgp.validate();
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (!(ci_level > 0.0 && ci_level < 1.0)) {
    throw std::invalid_argument("ci_level must lie in (0,1)");
  }
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (histogram_bins < 1) throw std::invalid_argument("histogram_bins must be >= 1");
  if (bootstrap_b < 1) throw std::invalid_argument("bootstrap b must be >= 1");
  fit_config.validate();
  for (const auto& m : variance_methods) {
    if (m.is_bootstrap && loss != LossKind::TLAD) {
      throw std::invalid_argument(
          "bootstrap variance applies to the tlad loss only");
    }
    if (!m.is_bootstrap && loss != LossKind::TLS) {
      throw std::invalid_argument(
          "plug-in bread variants apply to the tls loss only");
    }
  }
}

namespace {

nlohmann::json dgp_to_json(const DgpSpec& spec) {
  nlohmann::json j;
  j["n"] = spec.n;
  if (std::holds_alternative<TlsCounterexample>(spec.law)) {
    j["variant"] = "tls-ce";
  } else if (std::holds_alternative<TladCounterexample>(spec.law)) {
    j["variant"] = "tlad-ce";
  } else {
    const auto& s = std::get<SmoothExchangeable>(spec.law);
    j["variant"] = "smooth";
    j["k"] = s.k;
    j["theta0"] = vector_to_json(s.theta0.size() ? s.theta0
                                                 : ParamVector::Zero(s.k));
    j["rho"] = s.rho;
    j["x_scale"] = s.x_scale;
    j["alpha_scale"] = s.alpha_scale;
    j["x_base1"] = s.x_base1;
    j["x_base2"] = s.x_base2;
  }
  return j;
}

DgpSpec dgp_from_json(const nlohmann::json& j) {
  DgpSpec spec;
  spec.n = j.at("n").get<int>();
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "tls-ce") {
    spec.law = TlsCounterexample{};
  } else if (variant == "tlad-ce") {
    spec.law = TladCounterexample{};
  } else if (variant == "smooth") {
    SmoothExchangeable s;
    s.k = j.value("k", 1);
    if (j.contains("theta0")) s.theta0 = vector_from_json(j.at("theta0"));
    s.rho = j.value("rho", 0.0);
    s.x_scale = j.value("x_scale", 1.0);
    s.alpha_scale = j.value("alpha_scale", 0.0);
    s.x_base1 = j.value("x_base1", 0.0);
    s.x_base2 = j.value("x_base2", 0.0);
    spec.law = s;
  } else {
    throw std::invalid_argument("unknown dgp variant: " + variant);
  }
  spec.validate();
  return spec;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const McConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a(mc_config_to_json(config).dump())));
  return buf;
}

}  // namespace

McConfig mc_config_from_json(const nlohmann::json& j) {
  McConfig c;
  c.dgp = dgp_from_json(j.at("dgp"));
  c.reps = j.at("reps").get<int>();
  c.loss = loss_kind_from_string(j.value("loss", std::string("tls")));
  if (j.contains("variance_methods")) {
    for (const auto& m : j.at("variance_methods")) {
      McVarianceMethod method;
      const std::string name = m.get<std::string>();
      if (name == "bootstrap") {
        method.is_bootstrap = true;
      } else {
        method.bread = bread_variant_from_string(name);
      }
      c.variance_methods.push_back(method);
    }
  }
  c.ci_level = j.value("ci_level", 0.95);
  c.seed = j.value("seed", static_cast<std::uint64_t>(0));
  c.threads = j.value("threads", 1);
  c.histogram_bins = j.value("histogram_bins", 50);
  if (j.contains("bootstrap")) {
    const auto& b = j.at("bootstrap");
    c.bootstrap_b = b.value("b", 500);
    c.bootstrap_quantile_level = b.value("quantile_level", 0.9);
    c.bootstrap_psd = b.value("psd_project", false);
  }
  if (j.contains("fit")) {
    const auto& f = j.at("fit");
    c.fit_config.max_iters = f.value("max_iters", 500);
    c.fit_config.grad_tol = f.value("grad_tol", 1e-8);
    c.fit_config.step_tol = f.value("step_tol", 1e-10);
    c.fit_config.restarts = f.value("restarts", 2);
  }
  c.validate();
  return c;
}

nlohmann::json mc_config_to_json(const McConfig& config) {
  nlohmann::json j;
  j["dgp"] = dgp_to_json(config.dgp);
  j["reps"] = config.reps;
  j["loss"] = to_string(config.loss);
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : config.variance_methods) methods.push_back(m.name());
  j["variance_methods"] = methods;
  j["ci_level"] = config.ci_level;
  j["seed"] = config.seed;
  j["threads"] = config.threads;
  j["histogram_bins"] = config.histogram_bins;
  j["bootstrap"] = {{"b", config.bootstrap_b},
                    {"quantile_level", config.bootstrap_quantile_level},
                    {"psd_project", config.bootstrap_psd}};
  j["fit"] = {{"max_iters", config.fit_config.max_iters},
              {"grad_tol", config.fit_config.grad_tol},
              {"step_tol", config.fit_config.step_tol},
              {"restarts", config.fit_config.restarts}};
  return j;
}

Histogram emit_histogram(const std::vector<double>& values, int bins) {
  if (values.size() < 2) {
    throw std::invalid_argument("emit_histogram: need at least 2 values");
  }
  if (bins < 1) throw std::invalid_argument("emit_histogram: bins must be >= 1");
  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn_it, hi = *mx_it;
  if (!(hi > lo)) {
    throw std::invalid_argument("emit_histogram: zero-width value range");
  }
  Histogram h;
  h.edges = Eigen::VectorXd::LinSpaced(bins + 1, lo, hi);
  h.counts = Eigen::VectorXi::Zero(bins);
  const double width = (hi - lo) / bins;
  double sum = 0.0;
  for (double v : values) {
    int idx = static_cast<int>((v - lo) / width);
    if (idx >= bins) idx = bins - 1;
    if (idx < 0) idx = 0;
    h.counts[idx] += 1;
    sum += v;
  }
  const double n = static_cast<double>(values.size());
  h.overlay_mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - h.overlay_mean) * (v - h.overlay_mean);
  h.overlay_sd = std::sqrt(ss / n);
  return h;
}

NormalityReport normality_diagnostic(const std::vector<double>& values) {
  if (values.size() < 8) {
    throw std::invalid_argument("normality_diagnostic: need at least 8 values");
  }
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) {
    throw std::invalid_argument("normality_diagnostic: constant values");
  }
  NormalityReport r;
  r.n = static_cast<int>(values.size());
  r.skewness = m3 / std::pow(m2, 1.5);
  r.excess_kurtosis = m4 / (m2 * m2) - 3.0;

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(m2);
  double d_max = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf((sorted[i] - mean) / sd);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d_max = std::max({d_max, std::fabs(f - lo), std::fabs(f - hi)});
  }
  r.ks_statistic = d_max;
  return r;
}

std::vector<double> McResult::scaled_column(int j) const {
  std::vector<double> out;
  out.reserve(rep_ok.size());
  for (std::size_t r = 0; r < rep_ok.size(); ++r) {
    if (rep_ok[r]) out.push_back(scaled_devs(static_cast<int>(r), j));
  }
  return out;
}

McResult run_mc(const McConfig& config) {
  config.validate();
  const int reps = config.reps;
  const int k = config.dgp.k();
  const ParamVector theta0 = config.dgp.theta0();
  const double z = normal_quantile(0.5 * (1.0 + config.ci_level));
  const double root_n = std::sqrt(static_cast<double>(config.dgp.n));

  McResult res;
  res.config = config;
  res.rep_ok.assign(reps, 0);
  res.theta_hats = Matrix::Constant(reps, k, std::numeric_limits<double>::quiet_NaN());
  res.scaled_devs = res.theta_hats;
  for (const auto& m : config.variance_methods) {
    McMethodTrack track;
    track.method = m;
    track.sigma.resize(reps);
    track.bread.resize(reps);
    track.ci_hit = Matrix::Constant(reps, k, std::numeric_limits<double>::quiet_NaN());
    track.r_norm.assign(reps, 0.0);
    res.methods.push_back(std::move(track));
  }

  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= reps) return;
      try {
        Rng rng(config.seed, static_cast<std::uint64_t>(r) + 1);
        const PanelDataset data = simulate(config.dgp, rng);
        const FitResult fr = fit(data, config.loss, config.fit_config);
        if (!fr.converged || fr.flat) continue;
        res.theta_hats.row(r) = fr.theta_hat;
        res.scaled_devs.row(r) = root_n * (fr.theta_hat - theta0);

        for (std::size_t m = 0; m < res.methods.size(); ++m) {
          McMethodTrack& track = res.methods[m];
          Matrix sigma;
          if (track.method.is_bootstrap) {
            BootstrapConfig bc;
            bc.b = config.bootstrap_b;
            bc.quantile_level = config.bootstrap_quantile_level;
            bc.psd_project = config.bootstrap_psd;
            bc.fit_config = config.fit_config;
            bc.seed = mix64(config.seed +
                            0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(r) + 1));
            bc.threads = 1;  // outer replications carry the parallelism
            const RobustSigmaResult rs = robust_sigma_tlad(data, fr.theta_hat, bc);
            sigma = rs.sigma_hat;
          } else {
            const Matrix bread =
                bread_tls(data, fr.theta_hat, track.method.bread);
            const Matrix meat = meat_tls(data, fr.theta_hat);
            track.bread[r] = bread;
            if (track.method.bread == BreadVariant::H92) {
              const auto [l, rr] = bread_h92_decompose(data, fr.theta_hat);
              (void)l;
              track.r_norm[r] = rr.norm();
            }
            sigma = sandwich(bread, meat).sigma;
          }
          track.sigma[r] = sigma;
          for (int j = 0; j < k; ++j) {
            const double half =
                z * std::sqrt(std::max(0.0, sigma(j, j)) /
                              static_cast<double>(config.dgp.n));
            track.ci_hit(r, j) =
                std::fabs(fr.theta_hat[j] - theta0[j]) <= half ? 1.0 : 0.0;
          }
        }
        res.rep_ok[r] = 1;
      } catch (const std::exception&) {
        // replication failure, tallied below
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

  int ok = 0;
  for (char c : res.rep_ok) ok += c;
  res.failures = reps - ok;
  if (res.failures * 20 > reps) {
    throw McAbort("run_mc: " + std::to_string(res.failures) + " of " +
                  std::to_string(reps) + " replications failed");
  }

  res.mean_theta = Eigen::VectorXd::Zero(k);
  res.sd_theta = Eigen::VectorXd::Zero(k);
  for (int r = 0; r < reps; ++r) {
    if (res.rep_ok[r]) res.mean_theta += res.theta_hats.row(r).transpose();
  }
  res.mean_theta /= static_cast<double>(ok);
  for (int r = 0; r < reps; ++r) {
    if (res.rep_ok[r]) {
      const Eigen::VectorXd d =
          res.theta_hats.row(r).transpose() - res.mean_theta;
      res.sd_theta += d.cwiseProduct(d);
    }
  }
  res.sd_theta = (res.sd_theta / std::max(1, ok - 1)).cwiseSqrt();

  for (auto& track : res.methods) {
    track.coverage = Eigen::VectorXd::Zero(k);
    track.mean_bread = Matrix::Zero(k, k);
    double rsum = 0.0;
    for (int r = 0; r < reps; ++r) {
      if (!res.rep_ok[r]) continue;
      track.coverage += track.ci_hit.row(r).transpose();
      if (!track.method.is_bootstrap) track.mean_bread += track.bread[r];
      rsum += track.r_norm[r];
    }
    track.coverage /= static_cast<double>(ok);
    track.mean_bread /= static_cast<double>(ok);
    track.mean_r_norm = rsum / static_cast<double>(ok);
  }
  return res;
}

nlohmann::json mc_summary_json(const McResult& result) {
  const McConfig& config = result.config;
  nlohmann::json j;
  j["config"] = mc_config_to_json(config);
  j["config_hash"] = config_hash(config);
  j["reps"] = config.reps;
  j["failures"] = result.failures;
  j["mean_theta"] = vector_to_json(result.mean_theta);
  j["sd_theta"] = vector_to_json(result.sd_theta);

  nlohmann::json methods = nlohmann::json::array();
  for (const auto& track : result.methods) {
    nlohmann::json m;
    m["name"] = track.method.name();
    m["coverage"] = vector_to_json(track.coverage);
    if (!track.method.is_bootstrap) {
      m["mean_bread"] = matrix_to_json(track.mean_bread);
      if (track.method.bread == BreadVariant::H92) {
        m["mean_r_norm"] = track.mean_r_norm;
      }
    }
    methods.push_back(m);
  }
  j["variance_methods"] = methods;

  nlohmann::json per_comp = nlohmann::json::array();
  const int k = config.dgp.k();
  for (int c = 0; c < k; ++c) {
    nlohmann::json pc;
    pc["component"] = c + 1;
    const std::vector<double> vals = result.scaled_column(c);
    try {
      const Histogram h = emit_histogram(vals, config.histogram_bins);
      nlohmann::json edges = nlohmann::json::array();
      for (Eigen::Index i = 0; i < h.edges.size(); ++i) edges.push_back(h.edges[i]);
      nlohmann::json counts = nlohmann::json::array();
      for (Eigen::Index i = 0; i < h.counts.size(); ++i) counts.push_back(h.counts[i]);
      pc["histogram"] = {{"edges", edges},
                         {"counts", counts},
                         {"overlay_mean", h.overlay_mean},
                         {"overlay_sd", h.overlay_sd}};
      const NormalityReport nr = normality_diagnostic(vals);
      pc["normality"] = {{"skewness", nr.skewness},
                         {"excess_kurtosis", nr.excess_kurtosis},
                         {"ks_statistic", nr.ks_statistic}};
      double mean = 0.0;
      for (double v : vals) mean += v;
      pc["scaled_mean"] = vals.empty() ? 0.0 : mean / vals.size();
    } catch (const std::exception&) {
      // degenerate value set: histogram/diagnostics omitted
    }
    per_comp.push_back(pc);
  }
  j["scaled_estimates"] = per_comp;

  nlohmann::json meta;
  meta["tie_breaking"] = "first-minimizer";
  if (std::holds_alternative<TladCounterexample>(config.dgp.law)) {
    meta["reference_experiment"] = {{"n", 50000}, {"reps", 10000}};
    meta["desk_scale"] = {{"n", config.dgp.n}, {"reps", config.reps}};
  }
  j["metadata"] = meta;
  return j;
}

std::pair<std::string, std::string> write_mc_outputs(const McResult& result,
                                                     const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string hash = config_hash(result.config);
  const std::string csv_path = dir + "/mc_" + hash + "_reps.csv";
  const std::string json_path = dir + "/mc_" + hash + "_summary.json";

  const int k = result.config.dgp.k();
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path);
  csv << "rep,ok";
  for (int j = 1; j <= k; ++j) csv << ",theta_" << j;
  for (int j = 1; j <= k; ++j) csv << ",scaled_" << j;
  for (const auto& track : result.methods) {
    const std::string n = track.method.name();
    for (int j = 1; j <= k; ++j) csv << "," << n << "_ci_hit_" << j;
    for (int a = 1; a <= k; ++a) {
      for (int b = 1; b <= k; ++b) csv << "," << n << "_sigma_" << a << b;
    }
  }
  csv << "\n";
  char buf[32];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    csv << buf;
  };
  for (int r = 0; r < result.config.reps; ++r) {
    csv << r + 1 << "," << static_cast<int>(result.rep_ok[r]);
    for (int j = 0; j < k; ++j) {
      csv << ",";
      emit(result.theta_hats(r, j));
    }
    for (int j = 0; j < k; ++j) {
      csv << ",";
      emit(result.scaled_devs(r, j));
    }
    for (const auto& track : result.methods) {
      for (int j = 0; j < k; ++j) {
        csv << ",";
        emit(track.ci_hit(r, j));
      }
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
          csv << ",";
          emit(result.rep_ok[r] ? track.sigma[r](a, b)
                                : std::numeric_limits<double>::quiet_NaN());
        }
      }
    }
    csv << "\n";
  }
  csv.close();

  std::ofstream js(json_path);
  if (!js) throw std::runtime_error("cannot open " + json_path);
  js << mc_summary_json(result).dump(2) << "\n";
  return {csv_path, json_path};
}

}  // namespace trimest
