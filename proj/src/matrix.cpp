#include "gsnmf/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsnmf/error.hpp"
#include "gsnmf/random.hpp"
#include "gsnmf/simd/kernels.hpp"

namespace gsnmf {

DenseMatrix::DenseMatrix(Index rows, Index cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(Index rows, Index cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                     std::to_string(rows_ * cols_));
  }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::nonnegative(Index rows, Index cols, std::vector<double> data) {
  if (rows == 0 || cols == 0) throw ShapeError("matrix must have at least one row and one column");
  DenseMatrix m(rows, cols, std::move(data));
  for (double v : m.data_) {
    if (!std::isfinite(v)) throw DomainError("matrix contains a non-finite entry");
    if (v < 0.0) throw DomainError("matrix contains a negative entry");
  }
  return m;
}

DenseMatrix DenseMatrix::identity(Index n) {
  DenseMatrix m(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> DenseMatrix::col(Index j) const {
  std::vector<double> out(rows_);
  for (Index i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

double frobenius_norm_squared(const DenseMatrix& m) { return simd::sum_squares(m.values()); }

double frobenius_norm(const DenseMatrix& m) { return std::sqrt(frobenius_norm_squared(m)); }

double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("max_abs_difference: shape mismatch");
  double d = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (Index k = 0; k < av.size(); ++k) d = std::max(d, std::abs(av[k] - bv[k]));
  return d;
}

bool is_nonnegative(const DenseMatrix& m) {
  return std::ranges::all_of(m.values(), [](double v) { return v >= 0.0; });
}

bool all_finite(const DenseMatrix& m) {
  return std::ranges::all_of(m.values(), [](double v) { return std::isfinite(v); });
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols(), m.rows());
  constexpr Index block = 32;
  for (Index i0 = 0; i0 < m.rows(); i0 += block) {
    for (Index j0 = 0; j0 < m.cols(); j0 += block) {
      const Index i1 = std::min(i0 + block, m.rows());
      const Index j1 = std::min(j0 + block, m.cols());
      for (Index i = i0; i < i1; ++i)
        for (Index j = j0; j < j1; ++j) t(j, i) = m(i, j);
    }
  }
  return t;
}

void multiply_into(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  if (a.cols() != b.rows()) throw ShapeError("multiply: inner dimensions differ");
  if (out.rows() != a.rows() || out.cols() != b.cols()) out = DenseMatrix(a.rows(), b.cols());
  std::ranges::fill(out.values(), 0.0);
  const auto& k = simd::active_kernels();
  for (Index i = 0; i < a.rows(); ++i) {
    double* dst = out.row(i).data();
    for (Index l = 0; l < a.cols(); ++l) {
      const double s = a(i, l);
      if (s != 0.0) k.axpy(s, b.row(l).data(), dst, b.cols());
    }
  }
}

void multiply_transposed_into(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  if (a.cols() != b.cols()) throw ShapeError("multiply_transposed: inner dimensions differ");
  if (out.rows() != a.rows() || out.cols() != b.rows()) out = DenseMatrix(a.rows(), b.rows());
  const auto& k = simd::active_kernels();
  for (Index i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i).data();
    for (Index j = 0; j < b.rows(); ++j) out(i, j) = k.dot(ai, b.row(j).data(), a.cols());
  }
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows(), b.cols());
  multiply_into(a, b, out);
  return out;
}

DenseMatrix multiply_transposed(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows(), b.rows());
  multiply_transposed_into(a, b, out);
  return out;
}

void add_scaled(DenseMatrix& y, double alpha, const DenseMatrix& x) {
  if (y.rows() != x.rows() || y.cols() != x.cols()) throw ShapeError("add_scaled: shape mismatch");
  simd::axpy(alpha, x.values(), y.values());
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out = a;
  add_scaled(out, -1.0, b);
  return out;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out = a;
  add_scaled(out, 1.0, b);
  return out;
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
  DenseMatrix out = a;
  simd::scale(s, out.values());
  return out;
}

DenseMatrix select_cols(const DenseMatrix& m, std::span<const Index> cols) {
  DenseMatrix out(m.rows(), cols.size());
  for (Index j = 0; j < cols.size(); ++j) {
    if (cols[j] >= m.cols()) throw ShapeError("select_cols: column index out of range");
  }
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < cols.size(); ++j) out(i, j) = m(i, cols[j]);
  return out;
}

DenseMatrix select_rows(const DenseMatrix& m, std::span<const Index> rows) {
  DenseMatrix out(rows.size(), m.cols());
  for (Index i = 0; i < rows.size(); ++i) {
    if (rows[i] >= m.rows()) throw ShapeError("select_rows: row index out of range");
    std::ranges::copy(m.row(rows[i]), out.row(i).begin());
  }
  return out;
}

std::vector<double> col_l1_norms(const DenseMatrix& m) {
  std::vector<double> s(m.cols(), 0.0);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) s[j] += std::abs(m(i, j));
  return s;
}

std::vector<double> row_l1_norms(const DenseMatrix& m) {
  std::vector<double> s(m.rows(), 0.0);
  for (Index i = 0; i < m.rows(); ++i)
    for (double v : m.row(i)) s[i] += std::abs(v);
  return s;
}

std::vector<double> col_squared_norms(const DenseMatrix& m) {
  std::vector<double> s(m.cols(), 0.0);
  for (Index i = 0; i < m.rows(); ++i) simd::add_squares(m.row(i), s);
  return s;
}

std::vector<double> row_squared_norms(const DenseMatrix& m) {
  std::vector<double> s(m.rows());
  for (Index i = 0; i < m.rows(); ++i) s[i] = simd::sum_squares(m.row(i));
  return s;
}

bool is_permutation(std::span<const Index> perm, Index n) {
  if (perm.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (Index p : perm) {
    if (p >= n || seen[p]) return false;
    seen[p] = true;
  }
  return true;
}

Permutation inverse_permutation(std::span<const Index> perm) {
  if (!is_permutation(perm, perm.size())) throw ShapeError("inverse_permutation: not a permutation");
  Permutation inv(perm.size());
  for (Index i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  return inv;
}

DenseMatrix permute_rows_cols(const DenseMatrix& m, std::span<const Index> row_perm,
                              std::span<const Index> col_perm) {
  if (!is_permutation(row_perm, m.rows())) throw ShapeError("row permutation does not match the row count");
  if (!is_permutation(col_perm, m.cols())) throw ShapeError("column permutation does not match the column count");
  DenseMatrix out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) {
    const auto src = m.row(row_perm[i]);
    auto dst = out.row(i);
    for (Index j = 0; j < m.cols(); ++j) dst[j] = src[col_perm[j]];
  }
  return out;
}

double spectral_norm_estimate(const DenseMatrix& m, double tol, int max_iter, std::uint64_t seed) {
  if (!(tol > 0.0)) throw DomainError("spectral_norm_estimate: tol must be positive");
  if (m.empty() || frobenius_norm_squared(m) == 0.0) return 0.0;

  Rng rng(seed);
  std::vector<double> v(m.cols());
  for (double& x : v) x = 0.5 + rng.uniform();
  std::vector<double> u(m.rows());
  const auto& k = simd::active_kernels();

  double estimate = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const double vnorm = std::sqrt(k.sum_squares(v.data(), v.size()));
    if (vnorm == 0.0) break;
    k.scale(1.0 / vnorm, v.data(), v.size());
    // u = M v, v = M^T u
    for (Index i = 0; i < m.rows(); ++i) u[i] = k.dot(m.row(i).data(), v.data(), m.cols());
    std::ranges::fill(v, 0.0);
    for (Index i = 0; i < m.rows(); ++i) k.axpy(u[i], m.row(i).data(), v.data(), m.cols());
    // Rayleigh quotient of M^T M at the unit vector is ||M v||^2.
    const double next = std::sqrt(k.sum_squares(u.data(), u.size()));
    const bool done = it > 0 && std::abs(next - estimate) <= tol * next;
    estimate = next;
    if (done) break;
  }
  return estimate;
}

}  // namespace gsnmf
