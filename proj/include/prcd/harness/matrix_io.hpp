#pragma once

// Coordinate-format text files for the data matrix and plain-text vectors.
//
// Matrix grammar (a subset of MatrixMarket):
//   %%MatrixMarket matrix coordinate real general      <- header, required
//   % any number of comment lines
//   <rows> <cols> <nnz>                               <- counts line
//   <i> <j> <value>                                   <- exactly nnz entries, 1-based
// Duplicate (i, j) pairs are rejected. "integer" is accepted in place of "real".
//
// Vector grammar: one value per line; blank lines and lines starting with '%'
// or '#' are ignored.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "prcd/error.hpp"
#include "prcd/smooth.hpp"

namespace prcd {

/// Sparse matrix in coordinate form (0-based in memory).
struct CoordinateMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<MatrixEntry> entries;

  /// Entries grouped by row, each row sorted by column.
  std::vector<std::vector<SparseEntry>> row_lists() const {
    std::vector<std::vector<SparseEntry>> out(rows);
    for (const auto& e : entries) out[e.row].push_back({e.col, e.value});
    for (auto& r : out) {
      std::sort(r.begin(), r.end(), [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
    }
    return out;
  }

  /// Entries grouped by column, each column sorted by row.
  std::vector<std::vector<SparseEntry>> column_lists() const {
    std::vector<std::vector<SparseEntry>> out(cols);
    for (const auto& e : entries) out[e.col].push_back({e.row, e.value});
    for (auto& c : out) {
      std::sort(c.begin(), c.end(), [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
    }
    return out;
  }
};

/// Matrix plus right-hand side (labels for logistic problems).
struct MatrixFile {
  CoordinateMatrix matrix;
  std::vector<double> rhs;
};

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

}  // namespace detail

inline CoordinateMatrix read_matrix(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw InputError(source + ": empty matrix file");
  ++line_no;
  {
    std::istringstream header(detail::lower(line));
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%matrixmarket" || object != "matrix") {
      throw InputError(detail::where(source, line_no) + "missing '%%MatrixMarket matrix' header");
    }
    if (format != "coordinate") throw InputError(detail::where(source, line_no) + "only coordinate format is supported");
    if (field != "real" && field != "integer" && field != "double") {
      throw InputError(detail::where(source, line_no) + "unsupported field '" + field + "'");
    }
    if (symmetry != "general") {
      throw InputError(detail::where(source, line_no) + "unsupported symmetry '" + symmetry + "'");
    }
  }

  CoordinateMatrix m;
  std::size_t nnz = 0;
  bool have_counts = false;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    std::istringstream fields(line);
    if (!have_counts) {
      long long r = -1, c = -1, z = -1;
      if (!(fields >> r >> c >> z) || r < 0 || c < 0 || z < 0) {
        throw InputError(detail::where(source, line_no) + "expected '<rows> <cols> <nnz>'");
      }
      m.rows = static_cast<std::size_t>(r);
      m.cols = static_cast<std::size_t>(c);
      nnz = static_cast<std::size_t>(z);
      m.entries.reserve(nnz);
      have_counts = true;
      continue;
    }
    long long i = 0, j = 0;
    double v = 0.0;
    std::string rest;
    if (!(fields >> i >> j >> v) || (fields >> rest)) {
      throw InputError(detail::where(source, line_no) + "expected '<row> <col> <value>'");
    }
    if (i < 1 || j < 1 || static_cast<std::size_t>(i) > m.rows || static_cast<std::size_t>(j) > m.cols) {
      throw InputError(detail::where(source, line_no) + "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                       ") outside the declared " + std::to_string(m.rows) + " x " + std::to_string(m.cols) +
                       " bounds (indices are 1-based)");
    }
    if (m.entries.size() == nnz) {
      throw InputError(detail::where(source, line_no) + "more entries than the declared count " + std::to_string(nnz));
    }
    const auto key = std::make_pair(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1));
    if (!seen.insert(key).second) {
      throw InputError(detail::where(source, line_no) + "duplicate entry (" + std::to_string(i) + ", " +
                       std::to_string(j) + ")");
    }
    m.entries.push_back({key.first, key.second, v});
  }
  if (!have_counts) throw InputError(source + ": missing counts line");
  if (m.entries.size() != nnz) {
    throw InputError(source + ": header declares " + std::to_string(nnz) + " entries but file has " +
                     std::to_string(m.entries.size()));
  }
  return m;
}

inline void write_matrix(std::ostream& out, const CoordinateMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows << ' ' << m.cols << ' ' << m.entries.size() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& e : m.entries) out << e.row + 1 << ' ' << e.col + 1 << ' ' << e.value << '\n';
}

inline std::vector<double> read_vector(std::istream& in, const std::string& source = "<stream>") {
  std::vector<double> v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%' || line[first] == '#') continue;
    std::istringstream fields(line);
    double value = 0.0;
    std::string rest;
    if (!(fields >> value) || (fields >> rest)) {
      throw InputError(detail::where(source, line_no) + "expected a single number");
    }
    v.push_back(value);
  }
  return v;
}

inline void write_vector(std::ostream& out, const std::vector<double>& v) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (double e : v) out << e << '\n';
}

inline CoordinateMatrix load_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open matrix file '" + path + "'");
  return read_matrix(in, path);
}

inline std::vector<double> load_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open vector file '" + path + "'");
  return read_vector(in, path);
}

/// Loads a matrix and its right-hand side; the vector length must match the row count.
inline MatrixFile load_matrix(const std::string& matrix_path, const std::string& rhs_path) {
  MatrixFile f;
  f.matrix = load_matrix_file(matrix_path);
  f.rhs = load_vector_file(rhs_path);
  if (f.rhs.size() != f.matrix.rows) {
    throw InputError("right-hand side '" + rhs_path + "' has " + std::to_string(f.rhs.size()) +
                     " entries but the matrix has " + std::to_string(f.matrix.rows) + " rows");
  }
  return f;
}

inline void save_matrix_file(const std::string& path, const CoordinateMatrix& m) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_matrix(out, m);
}

inline void save_vector_file(const std::string& path, const std::vector<double>& v) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_vector(out, v);
}

}  // namespace prcd
