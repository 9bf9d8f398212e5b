#pragma once

#include "trimest/types.hpp"

namespace trimest {

struct FitConfig {
  int max_iters = 500;
  double grad_tol = 1e-8;
  double step_tol = 1e-10;
  ParamVector initial_theta;  // empty -> zero vector
  int restarts = 2;           // random restarts, TLAD only

  void validate() const;
};

struct FitResult {
  ParamVector theta_hat;
  double objective_value = 0.0;
  bool converged = false;
  int iterations = 0;
  double final_grad_norm = 0.0;
  /// True when the informative subsample is empty (objective constant in
  /// theta); theta_hat is then just the starting point.
  bool flat = false;
};

/// (1/n) sum_i m_kind(dx_i' theta, y_i).
double empirical_objective(const ParamVector& theta, const PanelDataset& data,
                           LossKind kind);

/// (1/n) sum_i score(dx_i' theta, y_i) dx_i; exact gradient for TLS, a
/// subgradient for TLAD.
ParamVector empirical_gradient(const ParamVector& theta,
                               const PanelDataset& data, LossKind kind);

/// Central finite differences of empirical_objective, coordinatewise.
ParamVector numeric_gradient(const ParamVector& theta,
                             const PanelDataset& data, LossKind kind,
                             double h);

/// Minimize the empirical trimmed loss. Deterministic for fixed inputs.
FitResult fit(const PanelDataset& data, LossKind kind,
              const FitConfig& config = FitConfig());

}  // namespace trimest
