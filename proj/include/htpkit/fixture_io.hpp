#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "htpkit/core.hpp"

namespace htpkit::io {

// Plain-text fixtures:
//   matrix: "m N" on the first line, then m rows of N floats
//   vector: "N" on the first line, then one row of N floats
// Values are written with 17 significant digits so reading back is exact.

Matrix read_matrix(std::istream& in);
Vector read_vector(std::istream& in);
void write_matrix(std::ostream& out, const Matrix& m);
void write_vector(std::ostream& out, const Vector& v);

Matrix load_matrix(const std::filesystem::path& path);
Vector load_vector(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const Matrix& m);
void save_vector(const std::filesystem::path& path, const Vector& v);

/// 17 significant digits, enough to read the same double back.
std::string format_real(double value);

}  // namespace htpkit::io
