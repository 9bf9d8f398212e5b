#include "trimest/types.hpp"

#include <cmath>
#include <stdexcept>

namespace trimest {

std::string to_string(LossKind kind) {
  return kind == LossKind::TLS ? "tls" : "tlad";
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "tls") return LossKind::TLS;
  if (s == "tlad") return LossKind::TLAD;
  throw std::invalid_argument("unknown loss kind: " + s);
}

namespace {

void validate_outcomes(const Eigen::VectorXd& y, const char* which) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) {
      throw std::invalid_argument(std::string("non-finite outcome in ") +
                                  which + " at row " + std::to_string(i + 1));
    }
    if (y[i] < 0.0) {
      throw std::invalid_argument(std::string("negative outcome in ") + which +
                                  " at row " + std::to_string(i + 1));
    }
  }
}

}  // namespace

PanelDataset::PanelDataset(Eigen::VectorXd y1, Eigen::VectorXd y2, Matrix x1,
                           Matrix x2)
    : y1_(std::move(y1)), y2_(std::move(y2)), x1_(std::move(x1)),
      x2_(std::move(x2)) {
  const Eigen::Index n = y1_.size();
  if (n < 1) throw std::invalid_argument("no observations");
  if (y2_.size() != n || x1_.rows() != n || x2_.rows() != n) {
    throw std::invalid_argument("panel columns have mismatched lengths");
  }
  if (x1_.cols() != x2_.cols() || x1_.cols() < 1) {
    throw std::invalid_argument("regressor dimension mismatch");
  }
  if (x1_.cols() > n) {
    throw std::invalid_argument("regressor dimension k must be <= n");
  }
  validate_outcomes(y1_, "y1");
  validate_outcomes(y2_, "y2");
  if (!x1_.allFinite() || !x2_.allFinite()) {
    throw std::invalid_argument("non-finite regressor value");
  }
  dx_ = x1_ - x2_;
}

PanelDataset::PanelDataset(const std::vector<PanelObservation>& obs)
    : PanelDataset(
          [&] {
            Eigen::VectorXd y(obs.size());
            for (std::size_t i = 0; i < obs.size(); ++i) y[i] = obs[i].y1;
            return y;
          }(),
          [&] {
            Eigen::VectorXd y(obs.size());
            for (std::size_t i = 0; i < obs.size(); ++i) y[i] = obs[i].y2;
            return y;
          }(),
          [&] {
            if (obs.empty()) throw std::invalid_argument("no observations");
            Matrix x(obs.size(), obs[0].x1.size());
            for (std::size_t i = 0; i < obs.size(); ++i) {
              if (obs[i].x1.size() != x.cols() ||
                  obs[i].x2.size() != x.cols()) {
                throw std::invalid_argument("regressor dimension mismatch at row " +
                                            std::to_string(i + 1));
              }
              x.row(i) = obs[i].x1;
            }
            return x;
          }(),
          [&] {
            Matrix x(obs.size(), obs[0].x1.size());
            for (std::size_t i = 0; i < obs.size(); ++i) x.row(i) = obs[i].x2;
            return x;
          }()) {}

PanelObservation PanelDataset::observation(int i) const {
  PanelObservation o;
  o.y1 = y1_[i];
  o.y2 = y2_[i];
  o.x1 = x1_.row(i);
  o.x2 = x2_.row(i);
  return o;
}

PanelDataset PanelDataset::period_swapped() const {
  return PanelDataset(y2_, y1_, x2_, x1_);
}

CrossSectionDataset::CrossSectionDataset(Eigen::VectorXd y, Matrix x)
    : y_(std::move(y)), x_(std::move(x)) {
  if (y_.size() < 1) throw std::invalid_argument("no observations");
  if (x_.rows() != y_.size() || x_.cols() < 1) {
    throw std::invalid_argument("regressor dimension mismatch");
  }
  validate_outcomes(y_, "y");
}

RankReport rank_check(const PanelDataset& data, double tol) {
  const int k = data.k();
  RankReport report;
  report.gram = Matrix::Zero(k, k);
  for (int i = 0; i < data.n(); ++i) {
    if (data.y1()[i] > 0.0 || data.y2()[i] > 0.0) {
      report.gram.noalias() +=
          data.dx().row(i).transpose() * data.dx().row(i);
    }
  }
  report.gram /= static_cast<double>(data.n());
  Eigen::SelfAdjointEigenSolver<Matrix> es(report.gram,
                                           Eigen::EigenvaluesOnly);
  report.min_eigenvalue = es.eigenvalues().minCoeff();
  report.pass = report.min_eigenvalue > tol;
  return report;
}

Matrix invert_spd(const Matrix& m, const std::string& label,
                  double rcond_min) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double amax = ev.cwiseAbs().maxCoeff();
  const double amin = ev.cwiseAbs().minCoeff();
  const double rcond = amax > 0.0 ? amin / amax : 0.0;
  if (!(rcond > rcond_min)) {
    throw std::runtime_error(label + " is singular (reciprocal condition " +
                             std::to_string(rcond) + " <= " +
                             std::to_string(rcond_min) + ")");
  }
  return es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace trimest
