#include "trimest/dgp.hpp"

#include <cmath>
#include <stdexcept>

#include "trimest/loss.hpp"
#include "trimest/math.hpp"
#include "trimest/quadrature.hpp"

namespace trimest {

namespace {

constexpr double kTail = 10.0;  // Gaussian tails truncated at 10 sd

// Integral of h over [0, s] for s >= 0, via the closed geometric shell sums.
double dyadic_mass_upto(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 0.5;
  int e = 0;
  const double m = std::frexp(s, &e);
  const int k = (m == 0.5) ? (1 - e) : -e;  // s in (2^-(k+1), 2^-k]
  if (k > 1100) return 0.0;
  // full shells below index k, then the partial shell when k is even
  const double below = (k % 2 == 0) ? std::ldexp(1.0, -(k + 3))
                                    : std::ldexp(1.0, -(k + 2));
  double mass = below;
  if (k % 2 == 0) mass += 0.75 * (s - std::ldexp(1.0, -(k + 1)));
  return mass;
}

int shell_index(double a) {
  int e = 0;
  const double m = std::frexp(a, &e);
  return (m == 0.5) ? (1 - e) : -e;
}

}  // namespace

int DgpSpec::k() const {
  if (const auto* s = std::get_if<SmoothExchangeable>(&law)) return s->k;
  return 1;
}

ParamVector DgpSpec::theta0() const {
  if (const auto* s = std::get_if<SmoothExchangeable>(&law)) {
    if (s->theta0.size() > 0) return s->theta0;
    return ParamVector::Zero(s->k);
  }
  return ParamVector::Zero(1);
}

void DgpSpec::validate() const {
  if (n < 1) throw std::invalid_argument("DgpSpec: n must be >= 1");
  if (const auto* s = std::get_if<SmoothExchangeable>(&law)) {
    if (s->k < 1) throw std::invalid_argument("SmoothExchangeable: k must be >= 1");
    if (!(std::fabs(s->rho) < 1.0)) {
      throw std::invalid_argument("SmoothExchangeable: rho must lie in (-1,1)");
    }
    if (s->x_scale < 0.0 || s->alpha_scale < 0.0) {
      throw std::invalid_argument("SmoothExchangeable: scales must be >= 0");
    }
    if (s->theta0.size() != 0 && s->theta0.size() != s->k) {
      throw std::invalid_argument("SmoothExchangeable: theta0 length mismatch");
    }
  }
}

PanelDataset simulate(const DgpSpec& spec, Rng rng) {
  spec.validate();
  const int n = spec.n;
  const int k = spec.k();
  Eigen::VectorXd y1(n), y2(n);
  Matrix x1(n, k), x2(n, k);

  if (std::holds_alternative<TlsCounterexample>(spec.law)) {
    for (int i = 0; i < n; ++i) {
      y1[i] = std::max(0.0, rng.normal());
      y2[i] = std::max(0.0, rng.normal());
      x1(i, 0) = 2.0;
      x2(i, 0) = 1.0;
    }
  } else if (std::holds_alternative<TladCounterexample>(spec.law)) {
    for (int i = 0; i < n; ++i) {
      const double d = sample_h(rng);
      const double s = sample_r(rng);
      y1[i] = std::max(0.0, 0.5 * (s + d));
      y2[i] = std::max(0.0, 0.5 * (s - d));
      x1(i, 0) = 2.0;
      x2(i, 0) = 1.0;
    }
  } else {
    const auto& sm = std::get<SmoothExchangeable>(spec.law);
    const ParamVector theta = spec.theta0();
    const double rho_c = std::sqrt(1.0 - sm.rho * sm.rho);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < k; ++j) x1(i, j) = sm.x_base1 + sm.x_scale * rng.normal();
      for (int j = 0; j < k; ++j) x2(i, j) = sm.x_base2 + sm.x_scale * rng.normal();
      const double alpha = sm.alpha_scale * rng.normal();
      const double z1 = rng.normal();
      const double e1 = z1;
      const double e2 = sm.rho * z1 + rho_c * rng.normal();
      y1[i] = std::max(0.0, alpha + x1.row(i).dot(theta) + e1);
      y2[i] = std::max(0.0, alpha + x2.row(i).dot(theta) + e2);
    }
  }
  return PanelDataset(std::move(y1), std::move(y2), std::move(x1),
                      std::move(x2));
}

double h_density(double t) {
  const double a = std::fabs(t);
  if (a <= 0.0 || a > 1.0) return 0.0;
  return (shell_index(a) % 2 == 0) ? 0.75 : 0.0;
}

double h_cdf(double t) {
  return t >= 0.0 ? 0.5 + dyadic_mass_upto(t) : 0.5 - dyadic_mass_upto(-t);
}

double sample_h(Rng& rng) {
  const double sgn = rng.uniform() < 0.5 ? -1.0 : 1.0;
  // Invert the one-sided CDF G(s) = 2 * integral of h over [0,s]; G maps the
  // even shell (2^-(k+1), 2^-k] onto (2^-(k+2), 2^-k] with slope 3/2.
  const double v = rng.uniform();
  int k = 0;
  while (k < 60 && v <= std::ldexp(1.0, -(k + 2))) k += 2;
  const double mag =
      std::ldexp(1.0, -(k + 1)) + (v - std::ldexp(1.0, -(k + 2))) / 1.5;
  return sgn * mag;
}

double r_density(double t) {
  if (t <= 1.0 || t >= 3.0) return 0.0;
  return t <= 2.0 ? t - 1.0 : 3.0 - t;
}

double r_cdf(double t) {
  if (t <= 1.0) return 0.0;
  if (t >= 3.0) return 1.0;
  if (t <= 2.0) return 0.5 * (t - 1.0) * (t - 1.0);
  return 1.0 - 0.5 * (3.0 - t) * (3.0 - t);
}

double sample_r(Rng& rng) {
  const double u = rng.uniform();
  return u <= 0.5 ? 1.0 + std::sqrt(2.0 * u) : 3.0 - std::sqrt(2.0 * (1.0 - u));
}

double analytic_G(double theta) {
  if (theta == 0.0) return 0.0;
  // antiderivative of Phi: u Phi(u) + phi(u) - phi(0), evaluated from 0
  auto int_phi = [](double u) {
    return u * normal_cdf(u) + normal_pdf(u) - normal_pdf(0.0);
  };
  if (theta < 0.0) return theta + int_phi(-theta);
  return theta - int_phi(theta);
}

double gamma_of_theta(double theta) {
  if (theta == 0.0) return 0.25;
  return 1.0 - normal_cdf(std::fabs(theta));
}

namespace {

struct FixedDesign {
  double dx = 0.0;          // common value of every coordinate of x1 - x2
  double mu1 = 0.0;         // alpha + x1' theta0 at alpha = 0
  double mu2 = 0.0;
  double t0 = 0.0;          // dx' theta0
  double rho = 0.0;
  double alpha_scale = 0.0;
  int k = 1;
};

FixedDesign smooth_fixed_design(const SmoothExchangeable& sm,
                                const ParamVector& theta) {
  if (sm.x_scale != 0.0) {
    throw std::runtime_error(
        "unsupported spec: population oracles require a deterministic "
        "regressor design (x_scale = 0)");
  }
  FixedDesign d;
  d.k = sm.k;
  d.dx = sm.x_base1 - sm.x_base2;
  const double ts = theta.sum();
  d.mu1 = sm.x_base1 * ts;
  d.mu2 = sm.x_base2 * ts;
  d.t0 = d.dx * ts;
  d.rho = sm.rho;
  d.alpha_scale = sm.alpha_scale;
  return d;
}

Matrix scaled_ones(int k, double dx, double value) {
  return Matrix::Constant(k, k, dx * dx * value);
}

// E over alpha ~ N(0, scale^2) of g(alpha); collapses to g(0) at scale 0.
double alpha_average(double scale, double tol,
                     const std::function<double(double)>& g) {
  if (scale == 0.0) return g(0.0);
  return integrate(
      [&](double a) { return g(a) * normal_pdf(a / scale) / scale; },
      -kTail * scale, kTail * scale, tol);
}

// E of tls_score(t0, max(0, mu1+e1), max(0, mu2+e2))^2 for bivariate normal
// errors, by nested quadrature split at the censoring and branch kinks.
double gauss_sq_score(double t0, double mu1, double mu2, double rho,
                      double tol) {
  const double s = std::sqrt(1.0 - rho * rho);
  auto outer = [&](double e2) {
    const double y2 = std::max(0.0, mu2 + e2);
    auto inner = [&](double e1) {
      const double y1 = std::max(0.0, mu1 + e1);
      const double sc = tls_score(t0, y1, y2);
      const double cond = normal_pdf((e1 - rho * e2) / s) / s;
      return sc * sc * cond;
    };
    const double lo = rho * e2 - kTail, hi = rho * e2 + kTail;
    return normal_pdf(e2) *
           integrate_with_splits(inner, lo, hi, {-mu1, t0 - mu1}, tol * 0.05);
  };
  return integrate_with_splits(outer, -kTail, kTail, {-mu2, -t0 - mu2}, tol);
}

}  // namespace

Matrix population_bread_tls(const DgpSpec& spec) {
  spec.validate();
  if (std::holds_alternative<TlsCounterexample>(spec.law)) {
    return scaled_ones(1, 1.0, 1.0 - normal_cdf(0.0));
  }
  if (std::holds_alternative<TladCounterexample>(spec.law)) {
    // errors are strictly positive, so the marginal CDF vanishes at 0
    return scaled_ones(1, 1.0, 1.0);
  }
  const auto& sm = std::get<SmoothExchangeable>(spec.law);
  const FixedDesign d = smooth_fixed_design(sm, spec.theta0());
  if (d.dx == 0.0) return Matrix::Zero(d.k, d.k);
  const double c = -std::min(d.mu1, d.mu2);
  const double w = alpha_average(d.alpha_scale, 1e-9, [&](double a) {
    return 1.0 - normal_cdf(c - a);
  });
  return scaled_ones(d.k, d.dx, w);
}

Matrix population_meat_tls(const DgpSpec& spec) {
  spec.validate();
  if (std::holds_alternative<TlsCounterexample>(spec.law)) {
    return scaled_ones(1, 1.0, gauss_sq_score(0.0, 0.0, 0.0, 0.0, 1e-8));
  }
  if (std::holds_alternative<TladCounterexample>(spec.law)) {
    // (d, s) have density h(d) r(s); split d at the dyadic shell edges
    std::vector<double> splits{0.0};
    for (int k = 1; k <= 40; ++k) {
      splits.push_back(std::ldexp(1.0, -k));
      splits.push_back(-std::ldexp(1.0, -k));
    }
    auto outer = [&](double dd) {
      auto inner = [&](double ss) {
        const double y1 = std::max(0.0, 0.5 * (ss + dd));
        const double y2 = std::max(0.0, 0.5 * (ss - dd));
        const double sc = tls_score(0.0, y1, y2);
        return sc * sc * r_density(ss);
      };
      return h_density(dd) * integrate_with_splits(inner, 1.0, 3.0, {2.0}, 1e-10);
    };
    return scaled_ones(1, 1.0,
                       integrate_with_splits(outer, -1.0, 1.0, splits, 1e-8));
  }
  const auto& sm = std::get<SmoothExchangeable>(spec.law);
  const FixedDesign d = smooth_fixed_design(sm, spec.theta0());
  if (d.dx == 0.0) return Matrix::Zero(d.k, d.k);
  const double v = alpha_average(d.alpha_scale, 1e-8, [&](double a) {
    return gauss_sq_score(d.t0, d.mu1 + a, d.mu2 + a, d.rho, 1e-8);
  });
  return scaled_ones(d.k, d.dx, v);
}

Matrix population_bread_tlad(const DgpSpec& spec) {
  spec.validate();
  if (std::holds_alternative<TladCounterexample>(spec.law)) {
    throw std::runtime_error("Hessian does not exist for this DGP");
  }
  if (!std::holds_alternative<SmoothExchangeable>(spec.law)) {
    throw std::runtime_error(
        "unsupported spec: population_bread_tlad covers the smooth law only");
  }
  const auto& sm = std::get<SmoothExchangeable>(spec.law);
  const FixedDesign d = smooth_fixed_design(sm, spec.theta0());
  if (d.dx == 0.0) return Matrix::Zero(d.k, d.k);
  const double t0 = d.t0;
  const double zmax = kTail + std::fabs(d.mu1) + std::fabs(d.mu2) +
                      std::fabs(t0) + 2.0 + kTail * d.alpha_scale;

  const double v = alpha_average(d.alpha_scale, 1e-7, [&](double a) {
    const double m1 = d.mu1 + a, m2 = d.mu2 + a;
    auto joint = [&](double u, double w) {
      return binormal_pdf(u - m1, w - m2, d.rho);
    };
    const double i1 =
        2.0 * integrate(
                  [&](double z) {
                    return joint(z + std::max(0.0, t0),
                                 z - std::min(0.0, t0));
                  },
                  0.0, zmax, 1e-7);
    double i23 = 0.0;
    if (t0 >= 0.0) {
      i23 = integrate([&](double z) { return joint(t0, z); }, -zmax, 0.0,
                      1e-7);
    } else {
      i23 = integrate([&](double z) { return joint(z, -t0); }, -zmax, 0.0,
                      1e-7);
    }
    return i1 + i23;
  });
  return scaled_ones(d.k, d.dx, v);
}

}  // namespace trimest
