#pragma once

#include <string>
#include <string_view>

#include "declsolve/dense.hpp"

namespace declsolve {

/// RFC-4180 CSV with numeric cells. Quoted cells are allowed; every record
/// must have the same number of fields. One cell gives a 1x1 value, one row
/// a 1xn value, one column an nx1 value. Throws kFormat (ragged records,
/// broken quoting) or kNonNumericCell, each naming `source` and the line.
Dense parse_csv(std::string_view text, const std::string& source = "<csv>");

/// Matrix Market `matrix array` or `matrix coordinate` files with real or
/// integer fields and general or symmetric layout, densified.
Dense parse_matrix_market(std::string_view text, const std::string& source = "<mtx>");

/// Matrix Market when the text starts with `%%MatrixMarket`, CSV otherwise.
Dense parse_data(std::string_view text, const std::string& source);

/// Reads and parses a data file.
Dense load_data(const std::string& path);

/// CSV text with 17 significant digits, so values round-trip exactly.
std::string format_csv(const Dense& d);
void write_csv(const std::string& path, const Dense& d);

/// Whole file as a string; throws kFormat if it cannot be read.
std::string read_file(const std::string& path);

}  // namespace declsolve
