#include "trimest/variance.hpp"

#include <cmath>
#include <stdexcept>

#include "trimest/loss.hpp"

namespace trimest {

std::string to_string(BreadVariant v) {
  switch (v) {
    case BreadVariant::Midpoint: return "midpoint";
    case BreadVariant::Alt1: return "alt1";
    case BreadVariant::Alt2: return "alt2";
    case BreadVariant::H92: return "h92";
  }
  return "?";
}

BreadVariant bread_variant_from_string(const std::string& s) {
  if (s == "midpoint") return BreadVariant::Midpoint;
  if (s == "alt1") return BreadVariant::Alt1;
  if (s == "alt2") return BreadVariant::Alt2;
  if (s == "h92") return BreadVariant::H92;
  throw std::invalid_argument("unknown bread variant: " + s);
}

namespace {

void check_dims(const ParamVector& theta, int k) {
  if (theta.size() != k) {
    throw std::invalid_argument("dimension mismatch: theta has length " +
                                std::to_string(theta.size()) + ", expected " +
                                std::to_string(k));
  }
}

// Index value classified against zero, with an optional tolerance band.
inline int zero_class(double t, double zero_tol) {
  if (std::fabs(t) <= zero_tol || t == 0.0) return 0;
  return t > 0.0 ? 1 : -1;
}

Matrix one_sided_bread(const PanelDataset& data, const Eigen::VectorXd& t,
                       bool equality_with_first, double zero_tol) {
  const int k = data.k();
  Matrix sum = Matrix::Zero(k, k);
  for (int i = 0; i < data.n(); ++i) {
    const int c = zero_class(t[i], zero_tol);
    double w = 0.0;
    if (data.y1()[i] > 0.0 && (c < 0 || (c == 0 && equality_with_first))) {
      w += 1.0;
    }
    if (data.y2()[i] > 0.0 && (c > 0 || (c == 0 && !equality_with_first))) {
      w += 1.0;
    }
    if (w != 0.0) {
      sum.noalias() += w * data.dx().row(i).transpose() * data.dx().row(i);
    }
  }
  return sum / static_cast<double>(data.n());
}

}  // namespace

Matrix meat_tls(const PanelDataset& data, const ParamVector& theta) {
  check_dims(theta, data.k());
  const Eigen::VectorXd t = data.dx() * theta;
  Matrix sum = Matrix::Zero(data.k(), data.k());
  for (int i = 0; i < data.n(); ++i) {
    const double s = tls_score(t[i], data.y1()[i], data.y2()[i]);
    if (s != 0.0) {
      sum.noalias() +=
          (s * s) * data.dx().row(i).transpose() * data.dx().row(i);
    }
  }
  return sum / static_cast<double>(data.n());
}

Matrix bread_tls(const PanelDataset& data, const ParamVector& theta,
                 BreadVariant variant, double zero_tol) {
  check_dims(theta, data.k());
  if (variant == BreadVariant::H92) return bread_h92(data, theta, zero_tol);
  const Eigen::VectorXd t = data.dx() * theta;
  if (variant == BreadVariant::Alt1) {
    return one_sided_bread(data, t, true, zero_tol);
  }
  if (variant == BreadVariant::Alt2) {
    return one_sided_bread(data, t, false, zero_tol);
  }
  return 0.5 * (one_sided_bread(data, t, true, zero_tol) +
                one_sided_bread(data, t, false, zero_tol));
}

std::pair<Matrix, Matrix> bread_h92_decompose(const PanelDataset& data,
                                              const ParamVector& theta,
                                              double zero_tol) {
  check_dims(theta, data.k());
  const Eigen::VectorXd t = data.dx() * theta;
  const int k = data.k();
  Matrix l = Matrix::Zero(k, k);
  Matrix r = Matrix::Zero(k, k);
  for (int i = 0; i < data.n(); ++i) {
    const int c = zero_class(t[i], zero_tol);
    const double y1 = data.y1()[i];
    const double y2 = data.y2()[i];
    if (c != 0) {
      if (-y2 < t[i] && t[i] < y1) {
        l.noalias() += data.dx().row(i).transpose() * data.dx().row(i);
      }
    } else if (y1 > 0.0 && y2 > 0.0) {
      r.noalias() += data.dx().row(i).transpose() * data.dx().row(i);
    }
  }
  l /= static_cast<double>(data.n());
  r /= static_cast<double>(data.n());
  return {l, r};
}

Matrix bread_h92(const PanelDataset& data, const ParamVector& theta,
                 double zero_tol) {
  const auto [l, r] = bread_h92_decompose(data, theta, zero_tol);
  return l + r;
}

Matrix meat_tlad(const PanelDataset& data, const ParamVector& theta) {
  check_dims(theta, data.k());
  const Eigen::VectorXd t = data.dx() * theta;
  Matrix sum = Matrix::Zero(data.k(), data.k());
  for (int i = 0; i < data.n(); ++i) {
    const double d = data.y1()[i] - data.y2()[i];
    double w = 0.0;
    if (data.y1()[i] > 0.0 && d > t[i]) w += 1.0;
    if (data.y2()[i] > 0.0 && d < t[i]) w += 1.0;
    if (w != 0.0) {
      sum.noalias() += w * data.dx().row(i).transpose() * data.dx().row(i);
    }
  }
  return sum / static_cast<double>(data.n());
}

SandwichCovariance sandwich(const Matrix& bread, const Matrix& meat) {
  if (bread.rows() != bread.cols() || meat.rows() != meat.cols() ||
      bread.rows() != meat.rows()) {
    throw std::invalid_argument("sandwich: bread and meat must be square of equal size");
  }
  SandwichCovariance out;
  out.bread = bread;
  out.meat = meat;
  const Matrix inv = invert_spd(bread, "bread");
  const Matrix s = inv * meat * inv;
  out.sigma = 0.5 * (s + s.transpose());
  return out;
}

Matrix cross_section_bread(const CrossSectionDataset& data,
                           const ParamVector& theta, double zero_tol) {
  check_dims(theta, data.k());
  const int n = data.n();
  if (n < 2) throw std::invalid_argument("cross_section_bread: need n >= 2");
  const int k = data.k();
  Matrix sum = Matrix::Zero(k, k);
  Eigen::RowVectorXd dx(k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      dx = data.x().row(i) - data.x().row(j);
      const double t = dx.dot(theta);
      const int c = zero_class(t, zero_tol);
      double w = 0.0;
      if (data.y()[i] > 0.0) w += (c < 0) ? 1.0 : (c == 0 ? 0.5 : 0.0);
      if (data.y()[j] > 0.0) w += (c > 0) ? 1.0 : (c == 0 ? 0.5 : 0.0);
      if (w != 0.0) sum.noalias() += w * dx.transpose() * dx;
    }
  }
  return sum / (static_cast<double>(n) * (n - 1));
}

}  // namespace trimest
