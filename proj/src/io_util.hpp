#pragma once

// Internal I/O helpers shared by the .cpp files; not part of the public API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "json.hpp"
#include "subnet/errors.hpp"

#include <Eigen/Dense>

namespace subnet::detail {

// Decimal form that round-trips the double exactly, preferring the shorter
// of 15/16/17 significant digits so "nice" values stay readable.
inline std::string fmt_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::Io, "cannot open for writing: " + path);
  return f;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::Io, "cannot open for reading: " + path);
  return f;
}

inline nlohmann::json load_json_file(const std::string& path) {
  auto f = open_in(path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, "malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

inline void save_json_file(const nlohmann::json& j, const std::string& path) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
  if (!f) fail(ErrorCode::Io, "write failed: " + path);
}

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j,
                                        const std::string& what) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    fail(ErrorCode::Schema, what + ": expected an array of rows");
  Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      fail(ErrorCode::Schema, what + ": ragged rows");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto& cell = row[static_cast<std::size_t>(k)];
      if (!cell.is_number())
        fail(ErrorCode::Schema, what + ": non-numeric entry");
      m(i, k) = cell.get<double>();
    }
  }
  return m;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j,
                                        const std::string& what) {
  if (!j.is_array()) fail(ErrorCode::Schema, what + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto& cell = j[static_cast<std::size_t>(i)];
    if (!cell.is_number()) fail(ErrorCode::Schema, what + ": non-numeric entry");
    v(i) = cell.get<double>();
  }
  return v;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <typename T>
const nlohmann::json& require_field(const nlohmann::json& j,
                                    const std::string& key, const T& where) {
  auto it = j.find(key);
  if (it == j.end())
    fail(ErrorCode::Schema, std::string(where) + ": missing field '" + key + "'");
  return *it;
}

}  // namespace subnet::detail
