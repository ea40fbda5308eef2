#include "htpkit/fixture_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace htpkit::io {

namespace {

double parse_real(const std::string& token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::io, fmt::format("cannot parse '{}' as a real number", token));
  }
  return value;
}

Index parse_count(std::istream& in, const char* what) {
  long long value = -1;
  if (!(in >> value) || value < 1) {
    throw Error(ErrorCode::io, fmt::format("fixture header: bad {}", what));
  }
  return static_cast<Index>(value);
}

double next_real(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw Error(ErrorCode::io, "fixture ended early");
  return parse_real(token);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {}", path.string()));
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, fmt::format("cannot write {}", path.string()));
  return out;
}

}  // namespace

std::string format_real(double value) { return fmt::format("{:.17g}", value); }

Matrix read_matrix(std::istream& in) {
  const Index m = parse_count(in, "row count");
  const Index n = parse_count(in, "column count");
  Matrix out(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) out(i, j) = next_real(in);
  return out;
}

Vector read_vector(std::istream& in) {
  const Index n = parse_count(in, "length");
  Vector out(n);
  for (Index i = 0; i < n; ++i) out[i] = next_real(in);
  return out;
}

void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_real(m(i, j));
    }
    out << '\n';
  }
}

void write_vector(std::ostream& out, const Vector& v) {
  out << v.size() << '\n';
  for (Index i = 0; i < v.size(); ++i) {
    if (i > 0) out << ' ';
    out << format_real(v[i]);
  }
  out << '\n';
}

Matrix load_matrix(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_matrix(in);
}

Vector load_vector(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_vector(in);
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  write_matrix(out, m);
}

void save_vector(const std::filesystem::path& path, const Vector& v) {
  auto out = open_out(path);
  write_vector(out, v);
}

}  // namespace htpkit::io
