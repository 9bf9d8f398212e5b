#pragma once

#include <variant>

#include "trimest/rng.hpp"
#include "trimest/types.hpp"

namespace trimest {

/// Fixed design x1=2, x2=1, theta0=0, alpha=0, iid standard normal errors;
/// the index dx'theta0 has all its mass at zero.
struct TlsCounterexample {};

/// Same fixed design, with errors e1=(S+D)/2, e2=(S-D)/2 where D follows the
/// dyadic shell density h and S the triangular density on [1,3]. The
/// expected-loss Hessian fails to exist at theta0=0.
struct TladCounterexample {};

/// Bivariate-normal errors with correlation rho, fixed effect
/// alpha = alpha_scale * N(0,1), regressors X_{tau,j} = x_base_tau +
/// x_scale * N(0,1), all draws independent across j and tau.
struct SmoothExchangeable {
  int k = 1;
  ParamVector theta0;  // empty -> zero vector
  double rho = 0.0;
  double x_scale = 1.0;
  double alpha_scale = 0.0;
  double x_base1 = 0.0;
  double x_base2 = 0.0;
};

struct DgpSpec {
  std::variant<TlsCounterexample, TladCounterexample, SmoothExchangeable> law;
  int n = 0;

  int k() const;
  ParamVector theta0() const;
  void validate() const;
};

/// Draw a panel of spec.n observations; deterministic given the stream.
PanelDataset simulate(const DgpSpec& spec, Rng rng);

/// Dyadic shell density: 3/4 on +-(2^-(k+1), 2^-k] for even k >= 0, zero on
/// odd shells and outside [-1, 1].
double h_density(double t);
double h_cdf(double t);
double sample_h(Rng& rng);

/// Triangular density on [1, 3] with peak at 2.
double r_density(double t);
double r_cdf(double t);
double sample_r(Rng& rng);

/// Expected score of the square loss in the TLS counterexample, as a
/// function of the scalar parameter.
double analytic_G(double theta);

/// Population value of the legacy bread in the TLS counterexample:
/// (1 - Phi(|theta|)) away from zero, 1/4 at zero.
double gamma_of_theta(double theta);

/// Population Hessian of the expected square loss. Supports specs with a
/// deterministic regressor design (x_scale = 0 for the smooth law); a random
/// fixed effect is integrated out by quadrature.
Matrix population_bread_tls(const DgpSpec& spec);

/// Population score outer product for the square loss, by adaptive
/// quadrature over the error density (abs tol 1e-8).
Matrix population_meat_tls(const DgpSpec& spec);

/// Population Hessian of the expected absolute loss (smooth law only;
/// throws "Hessian does not exist for this DGP" for the TLAD
/// counterexample).
Matrix population_bread_tlad(const DgpSpec& spec);

}  // namespace trimest
