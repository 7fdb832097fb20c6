#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace gsnmf {

using Index = std::size_t;
using Permutation = std::vector<Index>;

// Dense row-major matrix of doubles.
//
// Zero-sized matrices are representable (an r1 = 0 weight block is 0 x n);
// use DenseMatrix::nonnegative to build validated input data.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(Index rows, Index cols, double fill = 0.0);
  DenseMatrix(Index rows, Index cols, std::vector<double> data);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  // Validated construction: rows, cols >= 1, all entries finite and >= 0.
  static DenseMatrix nonnegative(Index rows, Index cols, std::vector<double> data);
  static DenseMatrix identity(Index n);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(Index i, Index j) noexcept { return data_[i * cols_ + j]; }
  double operator()(Index i, Index j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(Index i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(Index i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  std::vector<double> col(Index j) const;

  bool operator==(const DenseMatrix& other) const = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

double frobenius_norm(const DenseMatrix& m);
double frobenius_norm_squared(const DenseMatrix& m);
double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b);
bool is_nonnegative(const DenseMatrix& m);
bool all_finite(const DenseMatrix& m);

DenseMatrix transpose(const DenseMatrix& m);

// a * b
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
// a * b^T
DenseMatrix multiply_transposed(const DenseMatrix& a, const DenseMatrix& b);
// out = a * b, reusing out's storage.
void multiply_into(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);
// out = a * b^T, reusing out's storage.
void multiply_transposed_into(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);

// y += alpha * x, entrywise.
void add_scaled(DenseMatrix& y, double alpha, const DenseMatrix& x);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);

DenseMatrix select_cols(const DenseMatrix& m, std::span<const Index> cols);
DenseMatrix select_rows(const DenseMatrix& m, std::span<const Index> rows);

// l1 norms of columns / rows (entries assumed nonnegative, absolute values used).
std::vector<double> col_l1_norms(const DenseMatrix& m);
std::vector<double> row_l1_norms(const DenseMatrix& m);
std::vector<double> col_squared_norms(const DenseMatrix& m);
std::vector<double> row_squared_norms(const DenseMatrix& m);

bool is_permutation(std::span<const Index> perm, Index n);
Permutation inverse_permutation(std::span<const Index> perm);

// out(i, j) = m(row_perm[i], col_perm[j]). Throws ShapeError on a bad permutation.
DenseMatrix permute_rows_cols(const DenseMatrix& m, std::span<const Index> row_perm,
                              std::span<const Index> col_perm);

// Power iteration on M^T M. Deterministic: the start vector is drawn from `seed`.
// Stops when the relative change of the estimate drops below `tol`.
double spectral_norm_estimate(const DenseMatrix& m, double tol = 1e-8, int max_iter = 1000,
                              std::uint64_t seed = 0x5eed);

}  // namespace gsnmf
