#include "declsolve/io.hpp"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "declsolve/error.hpp"

namespace declsolve {
namespace {

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Full-string parse; accepts what strtod accepts (inf/nan included).
bool to_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  std::string buf(s);
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size();
}

}  // namespace

Dense parse_csv(std::string_view text, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();
  if (n >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // BOM

  while (i < n) {
    const std::size_t record_line = line;
    std::vector<double> record;
    bool blank = true;  // a single empty unquoted field
    std::string bad_cell;
    std::size_t bad_field = 0;
    std::size_t bad_line = 0;
    for (;;) {
      std::string cell;
      const std::size_t cell_line = line;
      bool quoted = false;
      std::size_t j = i;
      while (j < n && (text[j] == ' ' || text[j] == '\t')) ++j;
      if (j < n && text[j] == '"') {
        quoted = true;
        i = j + 1;
        for (;;) {
          if (i >= n) throw Error(ErrorKind::kFormat, where(source, cell_line) + "unterminated quoted field");
          const char c = text[i];
          if (c == '"') {
            if (i + 1 < n && text[i + 1] == '"') {
              cell += '"';
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (c == '\n') ++line;
          cell += c;
          ++i;
        }
        while (i < n && (text[i] == ' ' || text[i] == '\t')) ++i;
        if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          throw Error(ErrorKind::kFormat, where(source, line) + "text after closing quote");
        }
      } else {
        while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (text[i] == '"') throw Error(ErrorKind::kFormat, where(source, line) + "quote inside unquoted field");
          cell += text[i++];
        }
      }
      if (quoted || !trim(cell).empty()) blank = false;
      double v = 0.0;
      if (!to_double(cell, v) && bad_line == 0) {
        bad_cell = cell;
        bad_field = record.size() + 1;
        bad_line = cell_line;
      }
      record.push_back(v);
      if (i < n && text[i] == ',') {
        blank = false;
        ++i;
        continue;
      }
      break;
    }
    // end of record
    if (i < n && text[i] == '\r') ++i;
    if (i < n && text[i] == '\n') {
      ++i;
      ++line;
    }
    if (blank) continue;  // empty line
    if (bad_line != 0) {
      throw Error(ErrorKind::kNonNumericCell, where(source, bad_line) + "field " + std::to_string(bad_field) +
                                                  " is not a number: '" + bad_cell + "'");
    }
    if (!rows.empty() && record.size() != rows.front().size()) {
      throw Error(ErrorKind::kFormat, where(source, record_line) + "expected " +
                                          std::to_string(rows.front().size()) + " fields, found " +
                                          std::to_string(record.size()));
    }
    rows.push_back(std::move(record));
  }
  if (rows.empty()) throw Error(ErrorKind::kFormat, source + ": no data");
  Dense d(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) d(r, c) = rows[r][c];
  }
  return d;
}

Dense parse_matrix_market(std::string_view text, const std::string& source) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) { return Error(ErrorKind::kFormat, where(source, line_no) + what); };

  if (!std::getline(in, line)) throw Error(ErrorKind::kFormat, source + ": empty file");
  ++line_no;
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  for (std::string* s : {&object, &format, &field, &symmetry}) {
    for (char& c : *s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (banner != "%%MatrixMarket" || object != "matrix") throw fail("not a Matrix Market matrix header");
  const bool coordinate = format == "coordinate";
  if (!coordinate && format != "array") throw fail("unsupported format '" + format + "'");
  if (field != "real" && field != "integer" && field != "double") throw fail("unsupported field '" + field + "'");
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general") throw fail("unsupported symmetry '" + symmetry + "'");

  auto next_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++line_no;
      const std::string_view t = trim(out);
      if (t.empty() || t.front() == '%') continue;
      return true;
    }
    return false;
  };
  auto number = [&](std::istringstream& s, const char* what) {
    std::string tok;
    double v = 0.0;
    if (!(s >> tok)) throw fail(std::string("missing ") + what);
    if (!to_double(tok, v)) {
      throw Error(ErrorKind::kNonNumericCell, where(source, line_no) + what + " is not a number: '" + tok + "'");
    }
    return v;
  };
  auto index = [&](std::istringstream& s, const char* what, std::size_t limit) {
    const double v = number(s, what);
    if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v)) ||
        static_cast<std::size_t>(v) > limit) {
      throw fail(std::string(what) + " out of range");
    }
    return static_cast<std::size_t>(v);
  };

  if (!next_line(line)) throw fail("missing size line");
  std::istringstream sizes(line);
  const std::size_t rows = index(sizes, "row count", SIZE_MAX);
  const std::size_t cols = index(sizes, "column count", SIZE_MAX);
  if (symmetric && rows != cols) throw fail("symmetric matrix must be square");
  Dense d(rows, cols);
  if (coordinate) {
    const double nnz_raw = number(sizes, "entry count");
    const auto nnz = static_cast<std::size_t>(nnz_raw);
    for (std::size_t k = 0; k < nnz; ++k) {
      if (!next_line(line)) throw fail("expected " + std::to_string(nnz) + " entries, found " + std::to_string(k));
      std::istringstream s(line);
      const std::size_t r = index(s, "row index", rows);
      const std::size_t c = index(s, "column index", cols);
      const double v = number(s, "value");
      d(r - 1, c - 1) = v;
      if (symmetric) d(c - 1, r - 1) = v;
    }
  } else {
    // column-major; symmetric stores the lower triangle only
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t r = symmetric ? c : 0; r < rows; ++r) {
        if (!next_line(line)) throw fail("too few values");
        std::istringstream s(line);
        const double v = number(s, "value");
        d(r, c) = v;
        if (symmetric) d(c, r) = v;
      }
    }
  }
  if (next_line(line)) throw fail("unexpected extra data");
  return d;
}

Dense parse_data(std::string_view text, const std::string& source) {
  std::string_view head = text;
  while (!head.empty() && std::isspace(static_cast<unsigned char>(head.front()))) head.remove_prefix(1);
  if (head.rfind("%%MatrixMarket", 0) == 0) return parse_matrix_market(head, source);
  return parse_csv(text, source);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kFormat, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Dense load_data(const std::string& path) { return parse_data(read_file(path), path); }

std::string format_csv(const Dense& d) {
  std::string out;
  char buf[32];
  for (std::size_t r = 0; r < d.rows(); ++r) {
    for (std::size_t c = 0; c < d.cols(); ++c) {
      if (c > 0) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", d(r, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::string& path, const Dense& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kFormat, "cannot write '" + path + "'");
  out << format_csv(d);
}

}  // namespace declsolve
