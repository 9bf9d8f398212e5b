#include "trimest/loss.hpp"

#include <cmath>

#include "trimest/math.hpp"

namespace trimest {

double tls_loss(double t, double y1, double y2) {
  if (t <= -y2) return 0.5 * (y1 * y1 - 2.0 * (y2 + t) * y1);
  if (t >= y1) return 0.5 * (y2 * y2 + 2.0 * (t - y1) * y2);
  const double r = y1 - y2 - t;
  return 0.5 * r * r;
}

double tls_score(double t, double y1, double y2) {
  if (t <= -y2) return -y1;
  if (t >= y1) return y2;
  return y2 - y1 + t;
}

std::vector<double> tls_kinks(double y1, double y2) {
  if (y1 + y2 == 0.0) return {};
  return {-y2, y1};
}

double tlad_loss(double t, double y1, double y2) {
  if (t <= -y2) return y1 - (t + y2) * sign(y1);
  if (t >= y1) return y2 + (t - y1) * sign(y2);
  return std::fabs(y1 - y2 - t);
}

double tlad_shifted_loss(double t, double y1, double y2) {
  if (y1 > 0.0 && y2 > 0.0) {
    return std::fabs(y1 - y2 - t) - std::fabs(y1 - y2);
  }
  if (y1 > 0.0) return std::max(0.0, y1 - t) - y1;
  if (y2 > 0.0) return std::max(0.0, y2 + t) - y2;
  return 0.0;
}

namespace {

// One-sided limits of the tlad derivative. The middle-branch argument
// y1-y2-t is pushed to the correct side of zero before taking the sign.
double tlad_slope_left(double t, double y1, double y2) {
  if (t <= -y2) return -sign(y1);
  if (t <= y1) return (y1 - y2 - t >= 0.0) ? -1.0 : 1.0;
  return sign(y2);
}

double tlad_slope_right(double t, double y1, double y2) {
  if (t < -y2) return -sign(y1);
  if (t < y1) return (y1 - y2 - t > 0.0) ? -1.0 : 1.0;
  return sign(y2);
}

}  // namespace

double tlad_subgradient(double t, double y1, double y2) {
  return 0.5 * (tlad_slope_left(t, y1, y2) + tlad_slope_right(t, y1, y2));
}

std::vector<double> tlad_kinks(double y1, double y2) {
  if (y1 > 0.0 && y2 > 0.0) return {y1 - y2};
  if (y1 > 0.0) return {y1};
  if (y2 > 0.0) return {-y2};
  return {};
}

LossEval loss_eval(LossKind kind, double t, double y1, double y2) {
  LossEval e;
  const std::vector<double> kinks =
      kind == LossKind::TLS ? tls_kinks(y1, y2) : tlad_kinks(y1, y2);
  for (double k : kinks) {
    if (t == k) e.at_kink = true;
  }
  if (kind == LossKind::TLS) {
    e.value = tls_loss(t, y1, y2);
    e.derivative = tls_score(t, y1, y2);
  } else {
    e.value = tlad_loss(t, y1, y2);
    e.derivative = tlad_subgradient(t, y1, y2);
  }
  return e;
}

}  // namespace trimest
