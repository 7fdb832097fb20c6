#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "gsnmf/matrix.hpp"

namespace gsnmf::io {

// Decimal text with 17 significant digits; reading it back is exact.
std::string format_double(double v);

// Dense CSV: one matrix row per line, comma separated. Blank lines are ignored.
DenseMatrix read_csv(std::istream& in);
void write_csv(std::ostream& out, const DenseMatrix& m);

// MatrixMarket "array real general" (dense, column-major values).
DenseMatrix read_matrix_market(std::istream& in);
void write_matrix_market(std::ostream& out, const DenseMatrix& m);

// Dispatch on extension: ".mtx" is MatrixMarket, anything else CSV.
DenseMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const DenseMatrix& m);

}  // namespace gsnmf::io
