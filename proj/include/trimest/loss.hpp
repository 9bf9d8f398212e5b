#pragma once

#include <vector>

#include "trimest/types.hpp"

namespace trimest {

/// Loss value and first derivative at one index point. `derivative` uses the
/// kink convention of tlad_subgradient (midpoint of one-sided limits); for
/// the square loss the derivative is exact everywhere. `at_kink` flags
/// membership in the nondifferentiability set of the chosen loss: the
/// second-order kink set for the square loss, the subgradient kinks for the
/// absolute loss.
struct LossEval {
  double value = 0.0;
  double derivative = 0.0;
  bool at_kink = false;
};

/// Trimmed square loss (one-half square), three-branch form.
double tls_loss(double t, double y1, double y2);

/// Derivative of tls_loss in t: -y1 / (y2-y1+t) / y2 across the branches.
double tls_score(double t, double y1, double y2);

/// Points where tls_score itself is not differentiable: {} when y1+y2 = 0,
/// otherwise {-y2, y1}.
std::vector<double> tls_kinks(double y1, double y2);

/// Trimmed absolute loss, three-branch form, with sgn(0) = 0.
double tlad_loss(double t, double y1, double y2);

/// tlad_loss(t,y) - tlad_loss(0,y) through the three-indicator
/// decomposition (both outcomes positive / y2 = 0 / y1 = 0).
double tlad_shifted_loss(double t, double y1, double y2);

/// Subgradient of tlad_loss in t; at kinks, the midpoint of the one-sided
/// limits.
double tlad_subgradient(double t, double y1, double y2);

/// Kinks of tlad_loss in t (where the derivative jumps).
std::vector<double> tlad_kinks(double y1, double y2);

LossEval loss_eval(LossKind kind, double t, double y1, double y2);

}  // namespace trimest
