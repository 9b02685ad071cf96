#include "rankwatch/stream_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include "rankwatch/error.hpp"

namespace rankwatch {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_nan_token(std::string_view tok) {
  if (tok.size() != 3) return false;
  return std::tolower(static_cast<unsigned char>(tok[0])) == 'n' &&
         std::tolower(static_cast<unsigned char>(tok[1])) == 'a' &&
         std::tolower(static_cast<unsigned char>(tok[2])) == 'n';
}

struct ParsedRow {
  std::vector<double> values;
  Mask mask;
  bool any_missing = false;
};

ParsedRow parse_row(std::string_view line, std::size_t line_no) {
  ParsedRow row;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string_view tok =
        trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                : comma - start));
    if (tok.empty()) throw ParseError(line_no, "empty field");
    if (is_nan_token(tok)) {
      row.values.push_back(std::numeric_limits<double>::quiet_NaN());
      row.mask.push_back(false);
      row.any_missing = true;
    } else {
      double v = 0.0;
      const char* first = tok.data();
      if (*first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw ParseError(line_no, "cannot parse '" + std::string(tok) + "' as a number");
      }
      row.values.push_back(v);
      row.mask.push_back(true);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return row;
}

template <typename RowFn>
void for_each_row(std::istream& in, RowFn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t arity = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (trim(view).empty()) continue;
    if (trim(view).front() == '#') continue;
    ParsedRow row = parse_row(view, line_no);
    if (arity == 0) {
      arity = row.values.size();
    } else if (row.values.size() != arity) {
      throw ParseError(line_no, "expected " + std::to_string(arity) + " fields, found " +
                                    std::to_string(row.values.size()));
    }
    fn(std::move(row), line_no);
  }
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kStream, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kStream, "cannot write " + path.string());
  return out;
}

void write_header(std::ostream& out, const std::string& header) {
  if (header.empty()) return;
  std::istringstream lines(header);
  std::string line;
  while (std::getline(lines, line)) out << "# " << line << '\n';
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Stream read_stream(std::istream& in) {
  Stream out;
  for_each_row(in, [&](ParsedRow row, std::size_t) {
    StreamSample s;
    s.t = static_cast<std::int64_t>(out.size()) + 1;
    s.x = Eigen::Map<const Vector>(row.values.data(), static_cast<Index>(row.values.size()));
    if (row.any_missing) s.mask = std::move(row.mask);
    out.push_back(std::move(s));
  });
  return out;
}

Stream read_stream(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_stream(in);
}

void write_stream(const Stream& stream, std::ostream& out, const std::string& header) {
  write_header(out, header);
  for (const StreamSample& s : stream) {
    for (Index i = 0; i < s.dim(); ++i) {
      if (i > 0) out << ',';
      out << (s.observed(i) ? format_double(s.x[i]) : std::string("nan"));
    }
    out << '\n';
  }
}

void write_stream(const Stream& stream, const std::filesystem::path& path,
                  const std::string& header) {
  std::ofstream out = open_out(path);
  write_stream(stream, out, header);
  if (!out) throw Error(ErrorKind::kStream, "write failed for " + path.string());
}

Matrix read_matrix_rows(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  for_each_row(in, [&](ParsedRow row, std::size_t line_no) {
    if (row.any_missing) throw ParseError(line_no, "missing entries are not allowed here");
    rows.push_back(std::move(row.values));
  });
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void write_matrix_rows(const Matrix& rows, const std::filesystem::path& path,
                       const std::string& header) {
  std::ofstream out = open_out(path);
  write_header(out, header);
  for (Index i = 0; i < rows.rows(); ++i) {
    for (Index j = 0; j < rows.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(rows(i, j));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::kStream, "write failed for " + path.string());
}

}  // namespace rankwatch
