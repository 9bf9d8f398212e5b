#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "trimest/dgp.hpp"
#include "trimest/loss.hpp"
#include "trimest/math.hpp"
#include "trimest/quadrature.hpp"
#include "trimest/rng.hpp"

using namespace trimest;

TEST_CASE("dyadic density has unit mass and exact difference quotients") {
  CHECK(h_cdf(1.0) - h_cdf(-1.0) == 1.0);
  CHECK(h_cdf(-1.5) == 0.0);
  CHECK(h_cdf(2.0) == 1.0);
  for (int k : {0, 2, 4, 6}) {
    const double q =
        std::ldexp(1.0, k) * (h_cdf(std::ldexp(1.0, -k)) - h_cdf(0.0));
    CHECK(std::fabs(q - 0.5) <= 1e-12);
  }
  for (int k : {1, 3, 5}) {
    const double q =
        std::ldexp(1.0, k) * (h_cdf(std::ldexp(1.0, -k)) - h_cdf(0.0));
    CHECK(std::fabs(q - 0.25) <= 1e-12);
  }
}

TEST_CASE("dyadic density values on the shells") {
  CHECK(h_density(0.0) == 0.0);
  CHECK(h_density(1.5) == 0.0);
  CHECK(h_density(-1.5) == 0.0);
  CHECK(h_density(0.75) == 0.75);   // shell k=0 (even)
  CHECK(h_density(-0.75) == 0.75);  // symmetric
  CHECK(h_density(0.3) == 0.0);     // shell k=1 (odd)
  CHECK(h_density(0.2) == 0.75);    // shell k=2 (even)
  CHECK(h_density(0.09) == 0.0);    // shell k=3 (odd)
  // cdf integrates the density (numeric cross-check on a smooth-free grid)
  const double numeric = integrate_with_splits(
      h_density, 0.0, 1.0,
      {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125}, 1e-12);
  CHECK(numeric == doctest::Approx(h_cdf(1.0) - h_cdf(0.0)).epsilon(1e-6));
}

TEST_CASE("h sampling matches shell masses and its cdf") {
  Rng rng(41, 0);
  const int n = 100000;
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) {
    draws[i] = sample_h(rng);
    CHECK(std::fabs(draws[i]) <= 1.0);
    CHECK(h_density(draws[i]) > 0.0);
  }
  // per-sign shell frequencies vs (3/4) 2^-(k+1), three sigma bands
  for (int k : {0, 2, 4}) {
    const double lo = std::ldexp(1.0, -(k + 1)), hi = std::ldexp(1.0, -k);
    const double p_side = 0.75 * std::ldexp(1.0, -(k + 1));
    for (double sign : {1.0, -1.0}) {
      int count = 0;
      for (double d : draws) {
        const double a = sign * d;
        if (a > lo && a <= hi) ++count;
      }
      const double phat = static_cast<double>(count) / n;
      const double se = std::sqrt(p_side * (1.0 - p_side) / n);
      CHECK(std::fabs(phat - p_side) <= 3.0 * se);
    }
  }
  // KS against the exact cdf
  CHECK(oracle::ks_statistic(draws, h_cdf) < oracle::ks_critical(0.01, n));
}

TEST_CASE("triangular density r") {
  CHECK(r_density(1.0) == 0.0);
  CHECK(r_density(3.0) == 0.0);
  CHECK(r_density(2.0) == 1.0);
  CHECK(r_cdf(1.0) == 0.0);
  CHECK(r_cdf(3.0) == 1.0);
  CHECK(r_cdf(2.0) == doctest::Approx(0.5));
  const double numeric = integrate_with_splits(r_density, 1.0, 3.0, {2.0}, 1e-12);
  CHECK(numeric == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(42, 0);
  const int n = 100000;
  double sum = 0.0;
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) {
    draws[i] = sample_r(rng);
    sum += draws[i];
  }
  CHECK(sum / n == doctest::Approx(2.0).epsilon(0.005));
  CHECK(oracle::ks_statistic(draws, r_cdf) < oracle::ks_critical(0.01, n));
}

TEST_CASE("tls counterexample simulation") {
  DgpSpec spec;
  spec.law = TlsCounterexample{};
  spec.n = 10000;
  const PanelDataset d = simulate(spec, Rng(43, 0));
  int pos = 0;
  for (int i = 0; i < d.n(); ++i) {
    CHECK(d.x1()(i, 0) == 2.0);
    CHECK(d.x2()(i, 0) == 1.0);
    if (d.y1()[i] > 0.0) ++pos;
  }
  CHECK(static_cast<double>(pos) / d.n() == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("tlad counterexample errors live in (0,2)^2 and match h and r") {
  DgpSpec spec;
  spec.law = TladCounterexample{};
  spec.n = 100000;
  const PanelDataset d = simulate(spec, Rng(44, 0));
  std::vector<double> diff(d.n()), total(d.n());
  for (int i = 0; i < d.n(); ++i) {
    CHECK(d.y1()[i] > 0.0);
    CHECK(d.y1()[i] < 2.0);
    CHECK(d.y2()[i] > 0.0);
    CHECK(d.y2()[i] < 2.0);
    diff[i] = d.y1()[i] - d.y2()[i];
    total[i] = d.y1()[i] + d.y2()[i];
  }
  // the change of variables has Jacobian 1/2; these two KS checks pin it
  CHECK(oracle::ks_statistic(diff, h_cdf) <
        oracle::ks_critical(0.01, diff.size()));
  CHECK(oracle::ks_statistic(total, r_cdf) <
        oracle::ks_critical(0.01, total.size()));
}

TEST_CASE("smooth dgp with censored standard normal outcomes") {
  DgpSpec spec;
  SmoothExchangeable s;
  s.k = 1;
  s.x_scale = 0.0;
  spec.law = s;
  spec.n = 100000;
  const PanelDataset d = simulate(spec, Rng(45, 0));
  CHECK(d.y1().mean() ==
        doctest::Approx(normal_pdf(0.0)).epsilon(0.01 / normal_pdf(0.0)));
  CHECK(d.y1().minCoeff() == 0.0);
}

TEST_CASE("simulated errors are exchangeable for every law") {
  for (int which = 0; which < 3; ++which) {
    DgpSpec spec;
    if (which == 0) {
      spec.law = TlsCounterexample{};
    } else if (which == 1) {
      spec.law = TladCounterexample{};
    } else {
      SmoothExchangeable s;
      s.k = 1;
      s.rho = 0.4;
      s.x_scale = 0.0;
      s.alpha_scale = 0.0;
      spec.law = s;
    }
    spec.n = 100000;
    const PanelDataset d = simulate(spec, Rng(46 + which, 0));
    std::vector<double> a(d.n()), b(d.n());
    for (int i = 0; i < d.n(); ++i) {
      a[i] = d.y1()[i];
      b[i] = d.y2()[i];
    }
    CHECK(oracle::ks_two_sample(a, b) <
          oracle::ks_two_sample_critical(0.01, a.size(), b.size()));
  }
}

TEST_CASE("analytic expected score for the tls counterexample") {
  CHECK(analytic_G(0.0) == 0.0);
  const double h = 1e-4;
  CHECK(std::fabs((analytic_G(h) - analytic_G(-h)) / (2.0 * h) - 0.5) < 1e-3);
  CHECK(analytic_G(-1.0) ==
        doctest::Approx(-1.0 + normal_cdf(1.0) + normal_pdf(1.0) -
                        normal_pdf(0.0))
            .epsilon(1e-12));
  // quadrature cross-check of the closed-form antiderivative
  for (double theta : {-1.0, -0.3, 0.7, 2.0}) {
    const double tail = integrate(
        [](double u) { return normal_cdf(u); }, 0.0, std::fabs(theta), 1e-12);
    const double expect = theta < 0.0 ? theta + tail : theta - tail;
    CHECK(analytic_G(theta) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("empirical score matches analytic_G within three standard errors") {
  DgpSpec spec;
  spec.law = TlsCounterexample{};
  spec.n = 100000;
  const PanelDataset d = simulate(spec, Rng(48, 0));
  for (double theta : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < d.n(); ++i) {
      const double s = tls_score(theta, d.y1()[i], d.y2()[i]);
      sum += s;
      sum2 += s * s;
    }
    const double mean = sum / d.n();
    const double var = sum2 / d.n() - mean * mean;
    const double se = std::sqrt(var / d.n());
    CHECK(std::fabs(mean - analytic_G(theta)) <= 3.0 * se);
  }
}

TEST_CASE("gamma_of_theta values and jump") {
  CHECK(gamma_of_theta(0.0) == 0.25);
  CHECK(gamma_of_theta(1e-12) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(gamma_of_theta(1.0) ==
        doctest::Approx(1.0 - normal_cdf(1.0)).epsilon(1e-14));
  CHECK(gamma_of_theta(-1.0) == gamma_of_theta(1.0));
}

TEST_CASE("population bread tls") {
  DgpSpec tls_ce;
  tls_ce.law = TlsCounterexample{};
  tls_ce.n = 10;
  CHECK(population_bread_tls(tls_ce)(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

  DgpSpec tlad_ce;
  tlad_ce.law = TladCounterexample{};
  tlad_ce.n = 10;
  CHECK(population_bread_tls(tlad_ce)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  DgpSpec zero_design;
  SmoothExchangeable s;
  s.k = 2;
  s.x_scale = 0.0;
  zero_design.law = s;
  zero_design.n = 10;
  CHECK(population_bread_tls(zero_design).cwiseAbs().maxCoeff() == 0.0);

  // the paper's central discrepancy: the true Hessian is not the naive limit
  CHECK(population_bread_tls(tls_ce)(0, 0) != gamma_of_theta(0.0));

  DgpSpec random_x;
  SmoothExchangeable rx;
  rx.x_scale = 1.0;
  random_x.law = rx;
  random_x.n = 10;
  CHECK_THROWS_WITH_AS(population_bread_tls(random_x),
                       doctest::Contains("unsupported"), std::runtime_error);
}

TEST_CASE("population meat tls equals 1 - 1/pi on the counterexample") {
  DgpSpec spec;
  spec.law = TlsCounterexample{};
  spec.n = 10;
  const double v = population_meat_tls(spec)(0, 0);
  CHECK(v == doctest::Approx(1.0 - 1.0 / M_PI).epsilon(1e-7));

  // brute-force Monte Carlo oracle over censored standard normals
  Rng rng(49, 0);
  const int n = 10000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y1 = std::max(0.0, rng.normal());
    const double y2 = std::max(0.0, rng.normal());
    const double s = tls_score(0.0, y1, y2);
    sum += s * s;
  }
  CHECK(v == doctest::Approx(sum / n).epsilon(0.01));
}

TEST_CASE("population meat tls is swap symmetric and zero on flat designs") {
  DgpSpec zero_design;
  SmoothExchangeable s;
  s.k = 1;
  s.x_scale = 0.0;
  zero_design.law = s;
  zero_design.n = 10;
  CHECK(population_meat_tls(zero_design).cwiseAbs().maxCoeff() == 0.0);

  // swapping the two base levels flips dx but leaves the moment unchanged
  DgpSpec a, b;
  SmoothExchangeable sa, sb;
  sa.k = 1;
  sa.x_scale = 0.0;
  sa.x_base1 = 2.0;
  sa.x_base2 = 1.0;
  sa.rho = 0.3;
  sb = sa;
  sb.x_base1 = 1.0;
  sb.x_base2 = 2.0;
  ParamVector th(1);
  th << 0.4;
  sa.theta0 = th;
  sb.theta0 = th;
  a.law = sa;
  a.n = 10;
  b.law = sb;
  b.n = 10;
  CHECK(population_meat_tls(a)(0, 0) ==
        doctest::Approx(population_meat_tls(b)(0, 0)).epsilon(1e-7));
}

TEST_CASE("population meat tls on the tlad counterexample is E[D^2] = 4/9") {
  DgpSpec spec;
  spec.law = TladCounterexample{};
  spec.n = 10;
  // with both outcomes almost surely positive and t0 = 0 the score is
  // y2 - y1 = -D, so the meat is the second moment of the dyadic density
  CHECK(population_meat_tls(spec)(0, 0) ==
        doctest::Approx(4.0 / 9.0).epsilon(1e-7));
}

TEST_CASE("population bread tlad on the smooth scalar design") {
  DgpSpec spec;
  SmoothExchangeable s;
  s.k = 1;
  s.x_scale = 0.0;
  s.x_base1 = 2.0;
  s.x_base2 = 1.0;
  spec.law = s;
  spec.n = 10;
  const double expect = 0.5 / std::sqrt(M_PI) + 0.5 * normal_pdf(0.0);
  CHECK(population_bread_tlad(spec)(0, 0) ==
        doctest::Approx(expect).epsilon(1e-5 / expect));

  DgpSpec tlad_ce;
  tlad_ce.law = TladCounterexample{};
  tlad_ce.n = 10;
  CHECK_THROWS_WITH_AS(population_bread_tlad(tlad_ce),
                       doctest::Contains("does not exist"),
                       std::runtime_error);

  DgpSpec zero_design;
  SmoothExchangeable z;
  z.k = 2;
  z.x_scale = 0.0;
  zero_design.law = z;
  zero_design.n = 10;
  CHECK(population_bread_tlad(zero_design).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("simulate is deterministic given the stream") {
  DgpSpec spec;
  SmoothExchangeable s;
  s.k = 2;
  s.rho = 0.5;
  s.alpha_scale = 0.5;
  ParamVector th(2);
  th << 1.0, -0.5;
  s.theta0 = th;
  spec.law = s;
  spec.n = 50;
  const PanelDataset a = simulate(spec, Rng(50, 3));
  const PanelDataset b = simulate(spec, Rng(50, 3));
  CHECK((a.y1() - b.y1()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.x1() - b.x1()).cwiseAbs().maxCoeff() == 0.0);
  const PanelDataset c = simulate(spec, Rng(50, 4));
  CHECK((a.y1() - c.y1()).cwiseAbs().maxCoeff() != 0.0);
}
