#include "gsnmf/scaling.hpp"

#include <algorithm>
#include <cmath>

#include "gsnmf/error.hpp"

namespace gsnmf {
namespace {

double max_relative_deviation(const std::vector<double>& sums, double target) {
  double d = 0.0;
  for (double s : sums) d = std::max(d, std::abs(s - target) / target);
  return d;
}

DenseMatrix apply_factors(const DenseMatrix& m, const std::vector<double>& rf, const std::vector<double>& cf) {
  DenseMatrix out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) out(i, j) = rf[i] * m(i, j) * cf[j];
  return out;
}

}  // namespace

ScalingResult sinkhorn_scale(const DenseMatrix& m, double k1, double k2, ScalingOptions opts) {
  if (m.empty()) throw ShapeError("sinkhorn_scale: empty matrix");
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw DomainError("sinkhorn_scale: targets must be positive");
  const double lhs = static_cast<double>(m.cols()) * k1;
  const double rhs = static_cast<double>(m.rows()) * k2;
  if (std::abs(lhs - rhs) > 1e-12 * std::max(lhs, rhs)) {
    throw DomainError("sinkhorn_scale: targets must satisfy n * k1 == m * k2");
  }
  if (!is_nonnegative(m)) throw DomainError("sinkhorn_scale: matrix has negative entries");

  std::vector<double> rsum = row_l1_norms(m);
  std::vector<double> csum = col_l1_norms(m);
  if (std::ranges::any_of(rsum, [](double s) { return s == 0.0; }))
    throw ScalingError("sinkhorn_scale: matrix has an all-zero row");
  if (std::ranges::any_of(csum, [](double s) { return s == 0.0; }))
    throw ScalingError("sinkhorn_scale: matrix has an all-zero column");

  ScalingResult res;
  res.row_factors.assign(m.rows(), 1.0);
  res.col_factors.assign(m.cols(), 1.0);

  if (max_relative_deviation(rsum, k2) <= opts.tol && max_relative_deviation(csum, k1) <= opts.tol) {
    res.scaled = m;
    res.converged = true;
    return res;
  }

  DenseMatrix work = m;
  for (int it = 1; it <= opts.max_iter; ++it) {
    // rows -> k2
    for (Index i = 0; i < work.rows(); ++i) {
      const double f = k2 / rsum[i];
      res.row_factors[i] *= f;
      for (double& v : work.row(i)) v *= f;
    }
    // columns -> k1
    csum = col_l1_norms(work);
    for (Index j = 0; j < work.cols(); ++j) res.col_factors[j] *= k1 / csum[j];
    for (Index i = 0; i < work.rows(); ++i)
      for (Index j = 0; j < work.cols(); ++j) work(i, j) *= k1 / csum[j];

    rsum = row_l1_norms(work);
    res.iterations = it;
    if (max_relative_deviation(rsum, k2) <= opts.tol) {
      res.converged = true;
      break;
    }
  }
  // Rebuild from the factors so that scaled == D_r M D_c holds to rounding.
  res.scaled = apply_factors(m, res.row_factors, res.col_factors);
  return res;
}

ScalingResult sinkhorn_scale(const DenseMatrix& m, ScalingOptions opts) {
  return sinkhorn_scale(m, static_cast<double>(m.rows()), static_cast<double>(m.cols()), opts);
}

}  // namespace gsnmf
