#pragma once

#include <json.hpp>

#include "trimest/types.hpp"

namespace trimest {

/// Matrices travel as flat row-major JSON arrays.
inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
  }
  return a;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

inline Matrix matrix_from_json(const nlohmann::json& a, int rows, int cols) {
  if (static_cast<int>(a.size()) != rows * cols) {
    throw std::invalid_argument("matrix JSON has wrong length");
  }
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = a[i * cols + j].get<double>();
  }
  return m;
}

}  // namespace trimest
