#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace trimest {

using ParamVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class LossKind { TLS, TLAD };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& s);

/// One panel unit: censored outcomes and regressors for both periods.
struct PanelObservation {
  double y1 = 0.0;
  double y2 = 0.0;
  Eigen::VectorXd x1;
  Eigen::VectorXd x2;
};

/// Immutable two-period panel stored column-wise. All invariants (y >= 0,
/// uniform regressor dimension, k < n) are enforced at construction.
class PanelDataset {
 public:
  PanelDataset(Eigen::VectorXd y1, Eigen::VectorXd y2, Matrix x1, Matrix x2);
  explicit PanelDataset(const std::vector<PanelObservation>& obs);

  int n() const { return static_cast<int>(y1_.size()); }
  int k() const { return static_cast<int>(x1_.cols()); }

  const Eigen::VectorXd& y1() const { return y1_; }
  const Eigen::VectorXd& y2() const { return y2_; }
  const Matrix& x1() const { return x1_; }
  const Matrix& x2() const { return x2_; }
  /// Per-row regressor difference x1 - x2.
  const Matrix& dx() const { return dx_; }

  PanelObservation observation(int i) const;

  /// Dataset with the two periods swapped in every row.
  PanelDataset period_swapped() const;

 private:
  Eigen::VectorXd y1_, y2_;
  Matrix x1_, x2_, dx_;
};

/// Cross-sectional censored sample (y_i, x_i).
class CrossSectionDataset {
 public:
  CrossSectionDataset(Eigen::VectorXd y, Matrix x);

  int n() const { return static_cast<int>(y_.size()); }
  int k() const { return static_cast<int>(x_.cols()); }
  const Eigen::VectorXd& y() const { return y_; }
  const Matrix& x() const { return x_; }

 private:
  Eigen::VectorXd y_;
  Matrix x_;
};

/// Sandwich pieces: bread (Hessian-type), meat (score outer product), and
/// the assembled bread^-1 * meat * bread^-1.
struct SandwichCovariance {
  Matrix bread;
  Matrix meat;
  Matrix sigma;
};

struct RankReport {
  Matrix gram;
  double min_eigenvalue = 0.0;
  bool pass = false;
};

/// Gram matrix (1/n) sum 1{y1>0 or y2>0} dx dx' with its minimum eigenvalue;
/// pass iff the eigenvalue exceeds `tol`.
RankReport rank_check(const PanelDataset& data, double tol = 1e-10);

/// Inverse of a symmetric matrix; throws (naming `label` and the condition
/// estimate) when the reciprocal condition number falls below rcond_min.
Matrix invert_spd(const Matrix& m, const std::string& label,
                  double rcond_min = 1e-12);

}  // namespace trimest
