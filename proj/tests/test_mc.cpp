#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "trimest/mc.hpp"
#include "trimest/math.hpp"
#include "trimest/rng.hpp"

using namespace trimest;

namespace {

McConfig smooth_config(int reps, int n, int threads) {
  McConfig c;
  SmoothExchangeable s;
  s.k = 1;
  s.x_scale = 1.0;
  ParamVector th(1);
  th << 0.5;
  s.theta0 = th;
  c.dgp.law = s;
  c.dgp.n = n;
  c.reps = reps;
  c.loss = LossKind::TLS;
  McVarianceMethod m;
  m.bread = BreadVariant::Midpoint;
  c.variance_methods = {m};
  c.seed = 1234;
  c.threads = threads;
  return c;
}

}  // namespace

TEST_CASE("histogram basics") {
  const Histogram h = emit_histogram({0.0, 1.0}, 2);
  REQUIRE(h.counts.size() == 2);
  CHECK(h.counts[0] == 1);
  CHECK(h.counts[1] == 1);
  CHECK(h.overlay_mean == doctest::Approx(0.5));
  CHECK_THROWS_AS(emit_histogram({1.0}, 2), std::invalid_argument);
  CHECK_THROWS_WITH_AS(emit_histogram({2.0, 2.0, 2.0}, 4),
                       doctest::Contains("zero-width"), std::invalid_argument);
}

TEST_CASE("histogram mass conservation and gaussian self-consistency") {
  Rng rng(80, 0);
  const int n = 100000;
  std::vector<double> values(n);
  for (int i = 0; i < n; ++i) values[i] = rng.normal();
  const int bins = 50;
  const Histogram h = emit_histogram(values, bins);
  CHECK(h.counts.sum() == n);
  CHECK(h.overlay_mean == doctest::Approx(0.0).scale(1.0).epsilon(0.02));
  CHECK(h.overlay_sd == doctest::Approx(1.0).epsilon(0.02));

  // chi-square goodness of fit against the overlay gaussian
  double chi2 = 0.0;
  int used_bins = 0;
  for (int b = 0; b < bins; ++b) {
    const double p = normal_cdf((h.edges[b + 1] - h.overlay_mean) / h.overlay_sd) -
                     normal_cdf((h.edges[b] - h.overlay_mean) / h.overlay_sd);
    const double expect = p * n;
    if (expect < 1.0) continue;  // extreme tail bins
    ++used_bins;
    chi2 += (h.counts[b] - expect) * (h.counts[b] - expect) / expect;
  }
  CHECK(oracle::chi_square_pvalue(chi2, used_bins - 3) > 0.001);
}

TEST_CASE("normality diagnostic on known laws") {
  Rng rng(81, 0);
  const int n = 100000;
  std::vector<double> normal(n), expo(n);
  for (int i = 0; i < n; ++i) {
    normal[i] = rng.normal();
    expo[i] = -std::log(rng.uniform());
  }
  const NormalityReport rn = normality_diagnostic(normal);
  CHECK(std::fabs(rn.skewness) < 0.03);
  CHECK(std::fabs(rn.excess_kurtosis) < 0.06);
  CHECK(rn.ks_statistic < 0.01);

  const NormalityReport re = normality_diagnostic(expo);
  CHECK(re.skewness == doctest::Approx(2.0).epsilon(0.025));

  std::vector<double> two_point;
  for (int i = 0; i < 50; ++i) {
    two_point.push_back(0.0);
    two_point.push_back(1.0);
  }
  const NormalityReport rt = normality_diagnostic(two_point);
  CHECK(std::isfinite(rt.skewness));
  CHECK(std::isfinite(rt.excess_kurtosis));
  CHECK(rt.ks_statistic > 0.2);

  CHECK_THROWS_AS(normality_diagnostic({1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("run_mc single replication embeds a fit") {
  McConfig c = smooth_config(1, 400, 1);
  const McResult r = run_mc(c);
  CHECK(r.failures == 0);
  REQUIRE(r.rep_ok[0] == 1);
  CHECK(std::isfinite(r.theta_hats(0, 0)));
  const double hit = r.methods[0].ci_hit(0, 0);
  CHECK((hit == 0.0 || hit == 1.0));
}

TEST_CASE("run_mc is bit identical across thread counts") {
  McConfig c1 = smooth_config(24, 300, 1);
  McConfig c8 = smooth_config(24, 300, 8);
  const McResult a = run_mc(c1);
  const McResult b = run_mc(c8);
  REQUIRE(a.theta_hats.rows() == b.theta_hats.rows());
  for (int r = 0; r < 24; ++r) {
    CHECK(a.rep_ok[r] == b.rep_ok[r]);
    if (!a.rep_ok[r]) continue;
    CHECK(std::memcmp(&a.theta_hats(r, 0), &b.theta_hats(r, 0),
                      sizeof(double)) == 0);
    CHECK(std::memcmp(&a.methods[0].sigma[r](0, 0), &b.methods[0].sigma[r](0, 0),
                      sizeof(double)) == 0);
  }
  CHECK(a.mean_theta[0] == b.mean_theta[0]);
  CHECK(a.methods[0].coverage[0] == b.methods[0].coverage[0]);
}

TEST_CASE("coverage is monotone in the confidence level") {
  McConfig lo = smooth_config(60, 300, 2);
  lo.ci_level = 0.90;
  McConfig hi = smooth_config(60, 300, 2);
  hi.ci_level = 0.99;
  const McResult a = run_mc(lo);
  const McResult b = run_mc(hi);
  CHECK(b.methods[0].coverage[0] >= a.methods[0].coverage[0]);
}

TEST_CASE("histogram mass equals completed replications") {
  McConfig c = smooth_config(40, 300, 2);
  const McResult r = run_mc(c);
  const std::vector<double> vals = r.scaled_column(0);
  const Histogram h = emit_histogram(vals, 10);
  CHECK(h.counts.sum() == static_cast<int>(vals.size()));
  CHECK(static_cast<int>(vals.size()) == c.reps - r.failures);
}

TEST_CASE("tls counterexample harness run tracks the corrected hessian") {
  McConfig c;
  c.dgp.law = TlsCounterexample{};
  c.dgp.n = 2000;
  c.reps = 200;
  c.loss = LossKind::TLS;
  McVarianceMethod mid, h92;
  mid.bread = BreadVariant::Midpoint;
  h92.bread = BreadVariant::H92;
  c.variance_methods = {mid, h92};
  c.seed = 7;
  c.threads = 2;
  const McResult r = run_mc(c);
  CHECK(r.failures == 0);
  // scaled-down version of the acceptance bands
  CHECK(r.methods[0].mean_bread(0, 0) > 0.45);
  CHECK(r.methods[0].mean_bread(0, 0) < 0.55);
  CHECK(r.methods[1].mean_bread(0, 0) > 0.45);
  CHECK(r.methods[1].mean_bread(0, 0) < 0.55);
  CHECK(r.methods[1].mean_r_norm < 0.02);
}

TEST_CASE("mc outputs are written and named by the config hash") {
  McConfig c = smooth_config(10, 200, 1);
  const McResult r = run_mc(c);
  const std::string dir =
      (std::filesystem::temp_directory_path() / "trimest_mc_out").string();
  const auto [csv_path, json_path] = write_mc_outputs(r, dir);
  CHECK(std::filesystem::exists(csv_path));
  CHECK(std::filesystem::exists(json_path));

  std::ifstream csv(csv_path);
  std::string header;
  std::getline(csv, header);
  CHECK(header.find("theta_1") != std::string::npos);
  CHECK(header.find("midpoint_sigma_11") != std::string::npos);
  int rows = 0;
  std::string line;
  while (std::getline(csv, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == c.reps);

  std::ifstream js(json_path);
  const nlohmann::json j = nlohmann::json::parse(js);
  CHECK(j.contains("config_hash"));
  CHECK(j["failures"].get<int>() == 0);
  CHECK(j["variance_methods"][0]["name"] == "midpoint");
  std::filesystem::remove_all(dir);
}

TEST_CASE("mc config json round trip") {
  McConfig c = smooth_config(10, 200, 3);
  c.bootstrap_b = 77;
  const nlohmann::json j = mc_config_to_json(c);
  const McConfig back = mc_config_from_json(j);
  CHECK(back.reps == c.reps);
  CHECK(back.threads == 3);
  CHECK(back.bootstrap_b == 77);
  CHECK(back.dgp.n == c.dgp.n);
  CHECK(mc_config_to_json(back).dump() == j.dump());
}

TEST_CASE("run_mc aborts when too many replications fail") {
  // a dataset with dx = 0 makes every fit flat, so every replication fails
  McConfig c;
  SmoothExchangeable s;
  s.k = 1;
  s.x_scale = 0.0;  // regressors identically zero
  c.dgp.law = s;
  c.dgp.n = 50;
  c.reps = 10;
  c.loss = LossKind::TLS;
  c.seed = 5;
  CHECK_THROWS_AS(run_mc(c), McAbort);
}

TEST_CASE("method and loss mismatches are rejected") {
  McConfig c = smooth_config(5, 100, 1);
  c.loss = LossKind::TLAD;  // bread method but tlad loss
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  McConfig c2 = smooth_config(5, 100, 1);
  McVarianceMethod boot;
  boot.is_bootstrap = true;
  c2.variance_methods = {boot};  // bootstrap with tls loss
  CHECK_THROWS_AS(c2.validate(), std::invalid_argument);
}
