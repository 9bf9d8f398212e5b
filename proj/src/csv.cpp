#include "trimest/csv.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace trimest {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_number(const std::string& s, int row, int col) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("parse error at row " + std::to_string(row) +
                             ", column " + std::to_string(col + 1) + ": '" +
                             s + "'");
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) {
    ++pos;
  }
  if (pos != s.size()) {
    throw std::runtime_error("parse error at row " + std::to_string(row) +
                             ", column " + std::to_string(col + 1) + ": '" +
                             s + "'");
  }
  return v;
}

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

PanelDataset load_panel_csv(const std::string& path, std::optional<int> k) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("no observations");
  if (!header.empty() && header.back() == '\r') header.pop_back();

  const std::vector<std::string> cols = split_csv_line(header);
  if (cols.size() < 4 || strip(cols[0]) != "y1" || strip(cols[1]) != "y2" ||
      (cols.size() - 2) % 2 != 0) {
    throw std::runtime_error(
        "bad header: expected y1,y2,x1_1..x1_K,x2_1..x2_K");
  }
  const int header_k = static_cast<int>((cols.size() - 2) / 2);
  for (int j = 0; j < header_k; ++j) {
    if (strip(cols[2 + j]) != "x1_" + std::to_string(j + 1) ||
        strip(cols[2 + header_k + j]) != "x2_" + std::to_string(j + 1)) {
      throw std::runtime_error(
          "bad header: expected y1,y2,x1_1..x1_K,x2_1..x2_K");
    }
  }
  if (k && *k != header_k) {
    throw std::runtime_error("dimension mismatch: header has K=" +
                             std::to_string(header_k) + ", expected K=" +
                             std::to_string(*k));
  }
  const int kk = header_k;

  std::vector<double> y1v, y2v;
  std::vector<double> x1v, x2v;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (strip(line).empty()) continue;
    ++row;
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != 2 + 2 * kk) {
      throw std::runtime_error("dimension mismatch at row " +
                               std::to_string(row) + ": expected " +
                               std::to_string(2 + 2 * kk) + " fields, got " +
                               std::to_string(fields.size()));
    }
    const double y1 = parse_number(fields[0], row, 0);
    const double y2 = parse_number(fields[1], row, 1);
    if (y1 < 0.0 || y2 < 0.0) {
      throw std::runtime_error("negative outcome at row " +
                               std::to_string(row));
    }
    y1v.push_back(y1);
    y2v.push_back(y2);
    for (int j = 0; j < kk; ++j) x1v.push_back(parse_number(fields[2 + j], row, 2 + j));
    for (int j = 0; j < kk; ++j) {
      x2v.push_back(parse_number(fields[2 + kk + j], row, 2 + kk + j));
    }
  }
  if (row == 0) throw std::runtime_error("no observations");

  const int n = row;
  Eigen::VectorXd y1 = Eigen::Map<Eigen::VectorXd>(y1v.data(), n);
  Eigen::VectorXd y2 = Eigen::Map<Eigen::VectorXd>(y2v.data(), n);
  Matrix x1(n, kk), x2(n, kk);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < kk; ++j) {
      x1(i, j) = x1v[static_cast<std::size_t>(i) * kk + j];
      x2(i, j) = x2v[static_cast<std::size_t>(i) * kk + j];
    }
  }
  return PanelDataset(std::move(y1), std::move(y2), std::move(x1),
                      std::move(x2));
}

void save_panel_csv(const PanelDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << "y1,y2";
  for (int j = 1; j <= data.k(); ++j) out << ",x1_" << j;
  for (int j = 1; j <= data.k(); ++j) out << ",x2_" << j;
  out << "\n";
  char buf[32];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (int i = 0; i < data.n(); ++i) {
    emit(data.y1()[i]);
    out << ',';
    emit(data.y2()[i]);
    for (int j = 0; j < data.k(); ++j) {
      out << ',';
      emit(data.x1()(i, j));
    }
    for (int j = 0; j < data.k(); ++j) {
      out << ',';
      emit(data.x2()(i, j));
    }
    out << "\n";
  }
}

}  // namespace trimest
