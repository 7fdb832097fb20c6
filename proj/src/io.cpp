#include "gsnmf/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "gsnmf/error.hpp"

namespace gsnmf::io {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view token, std::size_t line) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError("line " + std::to_string(line) + ": cannot parse '" + std::string(token) + "' as a number");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

DenseMatrix read_csv(std::istream& in) {
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      data.push_back(parse_double(body.substr(start, comma - start), lineno));
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(cols) + " values, got " +
                       std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) throw ParseError("empty matrix file");
  return DenseMatrix(rows, cols, std::move(data));
}

void write_csv(std::ostream& out, const DenseMatrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

DenseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty matrix file");
  ++lineno;
  {
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || object != "matrix" || format != "array" ||
        (field != "real" && field != "double" && field != "integer") || symmetry != "general") {
      throw ParseError("unsupported MatrixMarket header: " + line);
    }
  }
  std::size_t rows = 0, cols = 0;
  bool have_size = false;
  std::vector<double> colmajor;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '%') continue;
    if (!have_size) {
      std::istringstream ss{std::string(body)};
      if (!(ss >> rows >> cols) || rows == 0 || cols == 0) throw ParseError("bad MatrixMarket size line");
      have_size = true;
      colmajor.reserve(rows * cols);
      continue;
    }
    colmajor.push_back(parse_double(body, lineno));
  }
  if (!have_size) throw ParseError("MatrixMarket file has no size line");
  if (colmajor.size() != rows * cols) {
    throw ParseError("MatrixMarket file has " + std::to_string(colmajor.size()) + " values, expected " +
                     std::to_string(rows * cols));
  }
  DenseMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = colmajor[j * rows + i];
  return m;
}

void write_matrix_market(std::ostream& out, const DenseMatrix& m) {
  out << "%%MatrixMarket matrix array real general\n";
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) out << format_double(m(i, j)) << '\n';
}

DenseMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  if (path.extension() == ".mtx") return read_matrix_market(in);
  return read_csv(in);
}

void write_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  if (path.extension() == ".mtx") {
    write_matrix_market(out, m);
  } else {
    write_csv(out, m);
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace gsnmf::io
