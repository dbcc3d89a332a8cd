#include "tmvn/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "tmvn/errors.hpp"

namespace tmvn::io {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& raw, double& out) {
  const std::string s = trim(raw);
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, out, std::chars_format::general);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

// RFC-4180 cell splitting for one physical line; doubled quotes escape.
std::vector<std::string> split_cells(const std::string& line, std::size_t row) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw InputError("row " + std::to_string(row) + ": unterminated quote");
  cells.push_back(cur);
  return cells;
}

void write_json(std::ostream& out, const nlohmann::json& j, int indent, int level) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (level + 1)), ' ') : "";
  const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent * level), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ',' << nl;
        first = false;
        out << pad << nlohmann::json(it.key()).dump() << (indent > 0 ? ": " : ":");
        write_json(out, it.value(), indent, level + 1);
      }
      out << nl << close << '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      out << '[';
      if (!flat) out << nl;
      bool first = true;
      for (const auto& e : j) {
        if (!first) out << (flat ? ", " : ",") << (flat ? "" : nl);
        first = false;
        if (!flat) out << pad;
        write_json(out, e, indent, level + 1);
      }
      if (!flat) out << nl << close;
      out << ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      out << (std::isfinite(v) ? format_double(v) : "null");
      return;
    }
    default:
      out << j.dump();
  }
}

std::vector<double> parse_list(const std::string& text, const std::string& what, bool allow_rows,
                               Index* rows) {
  std::vector<double> values;
  std::string token;
  Index row_count = 1;
  auto flush = [&] {
    const std::string t = trim(token);
    token.clear();
    if (t.empty()) return;
    double v = 0.0;
    if (!parse_number(t, v)) throw InputError(what + ": '" + t + "' is not a decimal number");
    values.push_back(v);
  };
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t') {
      flush();
    } else if (c == ';' && allow_rows) {
      flush();
      ++row_count;
    } else {
      token += c;
    }
  }
  flush();
  if (values.empty()) throw InputError(what + ": no values");
  if (rows != nullptr) *rows = row_count;
  return values;
}

}  // namespace

Matrix read_csv(std::istream& in, bool header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t cols = 0;
  bool skipped_header = !header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    const std::size_t row = rows.size() + 1;
    const std::vector<std::string> cells = split_cells(line, row);
    if (rows.empty()) {
      cols = cells.size();
    } else if (cells.size() != cols) {
      throw InputError("row " + std::to_string(row) + ": expected " + std::to_string(cols) +
                       " columns, found " + std::to_string(cells.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_number(cells[c], values[c])) {
        throw InputError("row " + std::to_string(row) + ", column " + std::to_string(c + 1) +
                         ": '" + trim(cells[c]) + "' is not a number");
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw InputError("no rows");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  }
  return m;
}

Matrix read_csv_file(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_csv(in, header);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& rows) {
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
  }
  for (Index r = 0; r < rows.rows(); ++r) {
    for (Index c = 0; c < rows.cols(); ++c) out << (c ? "," : "") << format_double(rows(r, c));
    out << '\n';
  }
}

std::string dump_json(const nlohmann::json& j, int indent) {
  std::ostringstream out;
  write_json(out, j, indent, 0);
  out << '\n';
  return out.str();
}

nlohmann::json to_json(const Vector& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

nlohmann::json to_json(const Matrix& m) {
  nlohmann::json j = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    j.push_back(row);
  }
  return j;
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  if (!parse_number(text, v)) throw InputError(what + ": '" + trim(text) + "' is not a decimal number");
  return v;
}

Vector parse_vector(const std::string& text, const std::string& what) {
  const std::vector<double> values = parse_list(text, what, false, nullptr);
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

Matrix parse_matrix(const std::string& text, const std::string& what) {
  Index rows = 1;
  const std::vector<double> values = parse_list(text, what, true, &rows);
  const auto count = static_cast<Index>(values.size());
  const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(count))));
  if (d * d != count) {
    throw InputError(what + ": " + std::to_string(count) + " entries do not form a square matrix");
  }
  if (rows != 1 && rows != d) throw InputError(what + ": row count does not match the entry count");
  Matrix m(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) m(i, j) = values[static_cast<std::size_t>(i * d + j)];
  }
  return m;
}

SymMatrix parse_symmetric(const std::string& text, const std::string& what) {
  const Matrix m = parse_matrix(text, what);
  try {
    return SymMatrix::from_dense(m);
  } catch (const InputError& e) {
    throw InputError(what + ": matrix is not symmetric");
  }
}

}  // namespace tmvn::io
