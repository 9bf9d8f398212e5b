// Test-only oracles: independent implementations used to freeze or verify
// expected values. Nothing here is linked into the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// Regularized upper incomplete gamma Q(a, x) (series / continued fraction).
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    // lower series
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
  }
  // continued fraction
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

inline double chi_square_pvalue(double stat, int df) {
  return gamma_q(0.5 * df, 0.5 * stat);
}

// One-sample KS statistic against a CDF.
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, std::fabs(f - static_cast<double>(i) / n),
                  std::fabs(f - static_cast<double>(i + 1) / n)});
  }
  return d;
}

// Critical value for the one-sample KS test at level alpha (asymptotic).
inline double ks_critical(double alpha, std::size_t n) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) /
         std::sqrt(static_cast<double>(n));
}

// Two-sample KS statistic; ties (e.g. censoring mass at zero) advance both
// pointers past the tied value before the CDFs are compared.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na -
                              static_cast<double>(j) / nb));
  }
  return d;
}

inline double ks_two_sample_critical(double alpha, std::size_t n,
                                     std::size_t m) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) *
         std::sqrt((static_cast<double>(n) + m) /
                   (static_cast<double>(n) * m));
}

// Closed-form eigendecomposition of a symmetric 2x2 [[a,b],[b,c]]; returns
// eigenvalues and unit eigenvectors columnwise in v.
struct Eigen2 {
  double lambda1, lambda2;  // lambda1 >= lambda2
  double v1[2], v2[2];
};

inline Eigen2 eigen_sym_2x2(double a, double b, double c) {
  Eigen2 e;
  const double tr = a + c;
  const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  e.lambda1 = 0.5 * tr + disc;
  e.lambda2 = 0.5 * tr - disc;
  if (b != 0.0) {
    double ux = e.lambda1 - c, uy = b;
    double norm = std::hypot(ux, uy);
    e.v1[0] = ux / norm;
    e.v1[1] = uy / norm;
    e.v2[0] = -e.v1[1];
    e.v2[1] = e.v1[0];
  } else {
    const bool first = a >= c;
    e.v1[0] = first ? 1.0 : 0.0;
    e.v1[1] = first ? 0.0 : 1.0;
    e.v2[0] = -e.v1[1];
    e.v2[1] = e.v1[0];
  }
  return e;
}

}  // namespace oracle
