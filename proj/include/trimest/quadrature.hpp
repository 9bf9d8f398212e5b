#pragma once

#include <functional>
#include <vector>

namespace trimest {

/// Adaptive Gauss-Kronrod 7/15 integration of f over [a, b] to absolute
/// tolerance abs_tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol);

/// Same, but with interior breakpoints the integrand is known to kink at;
/// each subinterval is integrated separately and the results summed.
double integrate_with_splits(const std::function<double(double)>& f, double a,
                             double b, const std::vector<double>& splits,
                             double abs_tol);

}  // namespace trimest
