#pragma once

#include <string>
#include <utility>

#include "trimest/types.hpp"

namespace trimest {

enum class BreadVariant { Midpoint, Alt1, Alt2, H92 };

std::string to_string(BreadVariant v);
BreadVariant bread_variant_from_string(const std::string& s);

/// Score outer-product estimate (1/n) sum score(dx_i' theta, y_i)^2 dx_i dx_i'
/// for the square loss.
Matrix meat_tls(const PanelDataset& data, const ParamVector& theta);

/// Plug-in Hessian estimate for the square loss. Midpoint weights the
/// dx'theta = 0 event by 1/2 on both indicators; Alt1 folds it into the
/// first indicator (<= 0), Alt2 into the second (>= 0). Midpoint is computed
/// as the exact average of the two one-sided sums, so
/// midpoint == (alt1 + alt2) / 2 holds bitwise.
Matrix bread_tls(const PanelDataset& data, const ParamVector& theta,
                 BreadVariant variant, double zero_tol = 0.0);

/// Legacy empirical-analogue Hessian (1/n) sum 1{-y2 < dx'theta < y1} dx dx'.
/// Computed as L + R from bread_h92_decompose, so that identity is bitwise.
Matrix bread_h92(const PanelDataset& data, const ParamVector& theta,
                 double zero_tol = 0.0);

/// Split of bread_h92 into the open-interval part L (dx'theta != 0) and the
/// equality part R (y1 > 0, y2 > 0, dx'theta = 0).
std::pair<Matrix, Matrix> bread_h92_decompose(const PanelDataset& data,
                                              const ParamVector& theta,
                                              double zero_tol = 0.0);

/// Score outer-product estimate for the absolute loss.
Matrix meat_tlad(const PanelDataset& data, const ParamVector& theta);

/// Assemble bread^-1 * meat * bread^-1, symmetrized; throws when bread is
/// singular beyond reciprocal condition 1e-12.
SandwichCovariance sandwich(const Matrix& bread, const Matrix& meat);

/// Cross-sectional plug-in Hessian: the pairwise kernel averaged over all
/// ordered pairs i != j.
Matrix cross_section_bread(const CrossSectionDataset& data,
                           const ParamVector& theta, double zero_tol = 0.0);

}  // namespace trimest
