#pragma once

// Matrix Market matrices, plain-text vectors and the JSON run report.
//
// Accepted Matrix Market headers:
//   %%MatrixMarket matrix {coordinate|array} real {general|symmetric}
// Anything else (integer, pattern, complex, hermitian, skew-symmetric) is an
// UnsupportedFormat error. Coordinate files load as CsrMatrix, array files as
// DenseMatrix. Symmetric files are expanded to full storage on read.
//
// Report JSON key order (stable, used by golden files):
//   n, iterations, stop_reason, residual_norms, alphas, betas, tol_rel,
//   invariants?: [{name, violation, threshold, pass, status, worst_iteration,
//                  normalization, legs: [{name, violation, threshold, pass}]}]

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cgsolve/diagnostics.hpp"
#include "cgsolve/error.hpp"
#include "cgsolve/linalg.hpp"
#include "cgsolve/solver.hpp"

namespace cgsolve {

enum class MatrixFormat { Coordinate, Array };
enum class MatrixSymmetry { General, Symmetric };

struct MatrixMarketHeader {
  MatrixFormat format = MatrixFormat::Coordinate;
  MatrixSymmetry symmetry = MatrixSymmetry::General;
};

namespace detail {

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(std::move(tok));
  return out;
}

inline bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

inline double parse_real(std::string_view tok, std::size_t line) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "not a number: '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) throw ParseError(line, "non-finite value: '" + std::string(tok) + "'");
  return v;
}

inline std::size_t parse_index(std::string_view tok, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "not a non-negative integer: '" + std::string(tok) + "'");
  }
  return v;
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Reads the next data line, skipping '%' comments and blank lines. Returns
// false at end of file.
inline bool next_data_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    const auto first = line.find_first_not_of(" \t");
    if (line[first] == '%') continue;
    return true;
  }
  return false;
}

inline MatrixMarketHeader parse_header(const std::string& line) {
  const auto tokens = split_ws(line);
  if (tokens.empty() || tokens[0] != "%%MatrixMarket") {
    throw UnsupportedFormat("line 1: missing %%MatrixMarket header");
  }
  if (tokens.size() != 5) throw UnsupportedFormat("line 1: header must have 5 fields");
  const std::string object = lowercase(tokens[1]);
  const std::string format = lowercase(tokens[2]);
  const std::string field = lowercase(tokens[3]);
  const std::string symmetry = lowercase(tokens[4]);
  if (object != "matrix") throw UnsupportedFormat("line 1: unsupported object '" + tokens[1] + "'");
  MatrixMarketHeader h;
  if (format == "coordinate") {
    h.format = MatrixFormat::Coordinate;
  } else if (format == "array") {
    h.format = MatrixFormat::Array;
  } else {
    throw UnsupportedFormat("line 1: unsupported format '" + tokens[2] + "'");
  }
  if (field != "real") throw UnsupportedFormat("line 1: unsupported field '" + tokens[3] + "'");
  if (symmetry == "general") {
    h.symmetry = MatrixSymmetry::General;
  } else if (symmetry == "symmetric") {
    h.symmetry = MatrixSymmetry::Symmetric;
  } else {
    throw UnsupportedFormat("line 1: unsupported symmetry '" + tokens[4] + "'");
  }
  return h;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

inline void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline CsrMatrix read_coordinate(std::istream& in, std::size_t& line_no, std::size_t n, std::size_t nnz,
                                 MatrixSymmetry symmetry) {
  // (row, col) -> (value, line it came from)
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::size_t>> entries;
  const auto insert = [&](std::size_t i, std::size_t j, double v) {
    const auto [it, fresh] = entries.emplace(std::pair{i, j}, std::pair{v, line_no});
    if (!fresh) {
      throw ParseError(line_no, "duplicate entry (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                                    "), first seen on line " + std::to_string(it->second.second));
    }
  };

  std::string line;
  std::size_t read = 0;
  while (next_data_line(in, line, line_no)) {
    if (read == nnz) throw ParseError(line_no, "more entries than the declared " + std::to_string(nnz));
    const auto tokens = split_ws(line);
    if (tokens.size() != 3) throw ParseError(line_no, "expected 'row col value'");
    const std::size_t i = parse_index(tokens[0], line_no);
    const std::size_t j = parse_index(tokens[1], line_no);
    if (i < 1 || i > n || j < 1 || j > n) {
      throw ParseError(line_no, "index (" + tokens[0] + ", " + tokens[1] + ") outside " + std::to_string(n) +
                                    "x" + std::to_string(n));
    }
    const double v = parse_real(tokens[2], line_no);
    insert(i - 1, j - 1, v);
    if (symmetry == MatrixSymmetry::Symmetric && i != j) insert(j - 1, i - 1, v);
    ++read;
  }
  if (read != nnz) {
    throw ParseError(line_no, "expected " + std::to_string(nnz) + " entries, found " + std::to_string(read));
  }

  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  cols.reserve(entries.size());
  vals.reserve(entries.size());
  for (const auto& [key, value] : entries) {
    ++offsets[key.first + 1];
    cols.push_back(key.second);
    vals.push_back(value.first);
  }
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  return CsrMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

inline DenseMatrix read_array(std::istream& in, std::size_t& line_no, std::size_t n, MatrixSymmetry symmetry) {
  DenseMatrix a(n);
  // Column-major; symmetric files list the lower triangle only.
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = symmetry == MatrixSymmetry::Symmetric ? j : 0; i < n; ++i) slots.emplace_back(i, j);
  }
  std::string line;
  std::size_t read = 0;
  while (next_data_line(in, line, line_no)) {
    for (const auto& tok : split_ws(line)) {
      if (read == slots.size()) throw ParseError(line_no, "more values than the declared dimensions allow");
      const auto [i, j] = slots[read++];
      const double v = parse_real(tok, line_no);
      a(i, j) = v;
      if (symmetry == MatrixSymmetry::Symmetric) a(j, i) = v;
    }
  }
  if (read != slots.size()) {
    throw ParseError(line_no, "expected " + std::to_string(slots.size()) + " values, found " + std::to_string(read));
  }
  return a;
}

}  // namespace detail

inline Operator read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw UnsupportedFormat("line 1: empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const MatrixMarketHeader header = detail::parse_header(line);

  if (!detail::next_data_line(in, line, line_no)) throw ParseError(line_no, "missing size line");
  const auto dims = detail::split_ws(line);
  const std::size_t expected = header.format == MatrixFormat::Coordinate ? 3 : 2;
  if (dims.size() != expected) {
    throw ParseError(line_no, "size line must have " + std::to_string(expected) + " fields");
  }
  const std::size_t rows = detail::parse_index(dims[0], line_no);
  const std::size_t cols = detail::parse_index(dims[1], line_no);
  if (rows != cols) throw UnsupportedFormat("line " + std::to_string(line_no) + ": matrix is not square");
  if (rows == 0) throw ParseError(line_no, "matrix dimension must be at least 1");

  if (header.format == MatrixFormat::Coordinate) {
    const std::size_t nnz = detail::parse_index(dims[2], line_no);
    return detail::read_coordinate(in, line_no, rows, nnz, header.symmetry);
  }
  return detail::read_array(in, line_no, rows, header.symmetry);
}

inline Operator read_matrix_market(const std::string& path) {
  auto in = detail::open_in(path);
  return read_matrix_market(in);
}

/// Coordinate/symmetric output of the lower triangle, 17 significant digits.
/// Exact zeros of a dense matrix are not stored; explicit CSR entries are.
inline void write_matrix_market(const Operator& a, std::ostream& out) {
  if (!check_symmetry(a)) throw InvalidArgument("write_matrix_market: matrix is not symmetric");
  const std::size_t n = dimension(a);
  std::vector<std::tuple<std::size_t, std::size_t, double>> lower;
  if (const auto* dense = std::get_if<DenseMatrix>(&a)) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        if ((*dense)(i, j) != 0.0) lower.emplace_back(i, j, (*dense)(i, j));
      }
    }
  } else {
    const auto& csr = std::get<CsrMatrix>(a);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = csr.row_offsets()[i]; k < csr.row_offsets()[i + 1]; ++k) {
        if (csr.col_indices()[k] <= i) lower.emplace_back(i, csr.col_indices()[k], csr.values()[k]);
      }
    }
  }
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << n << ' ' << n << ' ' << lower.size() << '\n';
  for (const auto& [i, j, v] : lower) out << i + 1 << ' ' << j + 1 << ' ' << detail::format_real(v) << '\n';
}

inline void write_matrix_market(const Operator& a, const std::string& path) {
  auto out = detail::open_out(path);
  write_matrix_market(a, out);
  detail::finish_write(out, path);
}

inline Vector read_vector(std::istream& in) {
  Vector v;
  std::string line;
  std::size_t line_no = 0;
  while (detail::next_data_line(in, line, line_no)) {
    const auto tokens = detail::split_ws(line);
    if (tokens.size() != 1) throw ParseError(line_no, "expected one value per line");
    v.push_back(detail::parse_real(tokens[0], line_no));
  }
  if (v.empty()) throw ParseError(std::max<std::size_t>(line_no, 1), "vector file holds no values");
  return v;
}

inline Vector read_vector(const std::string& path) {
  auto in = detail::open_in(path);
  return read_vector(in);
}

inline void write_vector(std::span<const double> v, std::ostream& out) {
  for (double x : v) out << detail::format_real(x) << '\n';
}

inline void write_vector(std::span<const double> v, const std::string& path) {
  auto out = detail::open_out(path);
  write_vector(v, out);
  detail::finish_write(out, path);
}

inline nlohmann::ordered_json to_json(const CheckEntry& e) {
  nlohmann::ordered_json j;
  j["name"] = e.name;
  j["violation"] = e.violation;
  j["threshold"] = e.threshold;
  j["pass"] = e.passed();
  j["status"] = std::string(to_string(e.status));
  j["worst_iteration"] = e.worst_iteration ? nlohmann::ordered_json(*e.worst_iteration) : nullptr;
  j["normalization"] = e.normalization;
  j["legs"] = nlohmann::ordered_json::array();
  for (const auto& leg : e.legs) {
    nlohmann::ordered_json l;
    l["name"] = leg.name;
    l["violation"] = leg.violation;
    l["threshold"] = leg.threshold;
    l["pass"] = leg.pass;
    j["legs"].push_back(std::move(l));
  }
  return j;
}

inline nlohmann::ordered_json to_json(const SolveReport& report, const InvariantReport* invariants = nullptr) {
  nlohmann::ordered_json j;
  j["n"] = report.size();
  j["iterations"] = report.iterations;
  j["stop_reason"] = std::string(to_string(report.stop_reason));
  j["residual_norms"] = report.residual_norms;
  j["alphas"] = report.alphas;
  j["betas"] = report.betas;
  j["tol_rel"] = report.tol_rel;
  if (invariants) {
    j["invariants"] = nlohmann::ordered_json::array();
    for (const auto& e : invariants->entries) j["invariants"].push_back(to_json(e));
  }
  return j;
}

inline std::string report_to_string(const SolveReport& report, const InvariantReport* invariants = nullptr) {
  return to_json(report, invariants).dump(2) + "\n";
}

inline void write_report(const SolveReport& report, const InvariantReport* invariants, const std::string& path) {
  auto out = detail::open_out(path);
  out << report_to_string(report, invariants);
  detail::finish_write(out, path);
}

}  // namespace cgsolve
