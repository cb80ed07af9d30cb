#include "glra/csv.hpp"

#include "glra/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace glra::csv {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << source << ":" << line << ": " << what;
  throw InputError(msg.str());
}

}  // namespace

Matrix parse(std::string_view text, std::string_view source) {
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::size_t line_no = 0;

  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (trim(line).empty()) continue;

    Index count = 0;
    while (true) {
      const auto comma = line.find(',');
      const std::string_view field = trim(line.substr(0, comma));
      if (field.empty()) fail(source, line_no, "empty field");
      double v = 0.0;
      const char* first = field.data();
      const char* last = field.data() + field.size();
      if (*first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last) {
        fail(source, line_no, "not a number: '" + std::string(field) + "'");
      }
      if (!std::isfinite(v)) fail(source, line_no, "non-finite value");
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    if (cols < 0) {
      cols = count;
    } else if (count != cols) {
      fail(source, line_no,
           "expected " + std::to_string(cols) + " columns, found " + std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) {
    throw InputError(std::string(source) + ": empty matrix");
  }
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  }
  return out;
}

std::string format(const Matrix& a) {
  std::string out;
  char buf[64];
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out.push_back(',');
      const auto res =
          std::to_chars(buf, buf + sizeof(buf), a(i, j), std::chars_format::general, 17);
      out.append(buf, res.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

Matrix read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

void write(const std::filesystem::path& path, const Matrix& a) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(path.string() + ": cannot open file for writing");
  out << format(a);
  if (!out) throw InputError(path.string() + ": write failed");
}

}  // namespace glra::csv
