#pragma once

#include <optional>
#include <string>

#include "trimest/types.hpp"

namespace trimest {

/// Load a panel CSV with header `y1,y2,x1_1..x1_K,x2_1..x2_K`.
/// K is taken from the header when `k` is not given; when given, it must
/// match. Rows with negative outcomes are rejected with their row number.
PanelDataset load_panel_csv(const std::string& path,
                            std::optional<int> k = std::nullopt);

/// Write a dataset in the same format; values round-trip bit-for-bit.
void save_panel_csv(const PanelDataset& data, const std::string& path);

}  // namespace trimest
