#pragma once

// Matrix JSON encoding: {"dim": n, "rows": [[...], ...]}, row-major doubles.

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ncag/pdcore.hpp"

namespace ncag {

using Json = nlohmann::json;

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return Json{{"dim", m.rows()}, {"rows", std::move(rows)}};
}

inline Json matrix_to_json(const PDMatrix& m) { return matrix_to_json(m.matrix()); }

inline Matrix matrix_from_json(const Json& j) {
  try {
    const auto n = j.at("dim").get<Index>();
    const Json& rows = j.at("rows");
    if (n < 1 || static_cast<Index>(rows.size()) != n) {
      throw IoError("matrix JSON: row count does not match dim");
    }
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i) {
      const Json& row = rows.at(static_cast<std::size_t>(i));
      if (static_cast<Index>(row.size()) != n) {
        throw IoError("matrix JSON: row length does not match dim");
      }
      for (Index j2 = 0; j2 < n; ++j2) m(i, j2) = row.at(static_cast<std::size_t>(j2)).get<double>();
    }
    return m;
  } catch (const Json::exception& e) {
    throw IoError(std::string("matrix JSON: ") + e.what());
  }
}

inline PDMatrix pd_from_json(const Json& j) { return PDMatrix(matrix_from_json(j)); }

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace ncag
