#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "tmvn/matrix_core.hpp"

namespace tmvn::io {

/// Numeric CSV, '.' decimal separator, optional header line, quoted cells
/// allowed. Errors name the 1-based data row and column; an input without
/// data rows throws InputError("no rows").
Matrix read_csv(std::istream& in, bool header);
Matrix read_csv_file(const std::string& path, bool header);

/// One row per matrix row, every value as %.17g.
void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& rows);

/// %.17g; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

/// JSON text with every floating-point number written to 17 significant
/// digits (non-finite numbers become null).
std::string dump_json(const nlohmann::json& j, int indent = 2);

nlohmann::json to_json(const Vector& v);
/// Row-major nested arrays.
nlohmann::json to_json(const Matrix& m);

/// Strict decimal parse of the whole string (surrounding blanks allowed).
double parse_double(const std::string& text, const std::string& what);
/// Comma- or blank-separated list, e.g. "1,-0.5,2".
Vector parse_vector(const std::string& text, const std::string& what);
/// Row-major square matrix. Rows may be separated by ';' or the entries
/// given flat; the count must be a perfect square.
Matrix parse_matrix(const std::string& text, const std::string& what);
/// As parse_matrix, then symmetry is validated.
SymMatrix parse_symmetric(const std::string& text, const std::string& what);

}  // namespace tmvn::io
