// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "eixgnn/errors.hpp"

namespace eixgnn::json_util {

using nlohmann::json;

inline json read_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open file: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw FormatError(path.string(), std::string("invalid JSON: ") + e.what());
  }
}

inline void write_file(const std::filesystem::path &path, const json &j) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write file: " + path.string());
  out << j.dump() << '\n';
}

inline const json &field(const json &obj, const char *key,
                         const std::string &path) {
  if (!obj.is_object())
    throw FormatError(path, "expected object");
  auto it = obj.find(key);
  if (it == obj.end())
    throw FormatError(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

inline std::string join(const std::string &path, const char *key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

inline std::string index(const std::string &path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

inline std::size_t as_size(const json &j, const std::string &path) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw FormatError(path, "expected non-negative integer");
  return j.get<std::size_t>();
}

inline double as_double(const json &j, const std::string &path) {
  if (!j.is_number())
    throw FormatError(path, "expected number");
  return j.get<double>();
}

inline bool as_bool(const json &j, const std::string &path) {
  if (!j.is_boolean())
    throw FormatError(path, "expected boolean");
  return j.get<bool>();
}

inline std::string as_string(const json &j, const std::string &path) {
  if (!j.is_string())
    throw FormatError(path, "expected string");
  return j.get<std::string>();
}

inline const json &as_array(const json &j, const std::string &path) {
  if (!j.is_array())
    throw FormatError(path, "expected array");
  return j;
}

//! Row-major nested array -> dense matrix. An empty outer array yields a
//! 0 x cols matrix when cols is known (cols < 0 means "infer").
inline Eigen::MatrixXd as_matrix(const json &j, const std::string &path,
                                 Eigen::Index cols = -1) {
  as_array(j, path);
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows > 0 && cols < 0) {
    as_array(j[0], index(path, 0));
    cols = static_cast<Eigen::Index>(j[0].size());
  }
  Eigen::MatrixXd m(rows, std::max<Eigen::Index>(cols, 0));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row_path = index(path, static_cast<std::size_t>(r));
    const json &row = as_array(j[static_cast<std::size_t>(r)], row_path);
    if (static_cast<Eigen::Index>(row.size()) != m.cols())
      throw FormatError(row_path, "expected " + std::to_string(m.cols()) +
                                      " entries, got " +
                                      std::to_string(row.size()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = as_double(row[static_cast<std::size_t>(c)],
                          index(row_path, static_cast<std::size_t>(c)));
  }
  return m;
}

inline Eigen::VectorXd as_vector(const json &j, const std::string &path) {
  as_array(j, path);
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = as_double(j[i], index(path, i));
  return v;
}

inline json to_json(const Eigen::MatrixXd &m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const Eigen::VectorXd &v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    arr.push_back(v(i));
  return arr;
}

} // namespace eixgnn::json_util
