#include "gsnmf/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsnmf/assignment.hpp"
#include "gsnmf/error.hpp"
#include "gsnmf/random.hpp"
#include "gsnmf/simd/kernels.hpp"

namespace gsnmf {

IndexSets::IndexSets(std::vector<Index> c, std::vector<Index> r) : cols(std::move(c)), rows(std::move(r)) {
  std::ranges::sort(cols);
  std::ranges::sort(rows);
  if (std::ranges::adjacent_find(cols) != cols.end()) throw ShapeError("duplicate column index");
  if (std::ranges::adjacent_find(rows) != rows.end()) throw ShapeError("duplicate row index");
}

void IndexSets::validate(Index m, Index n) const {
  if (total() == 0) throw ShapeError("index sets are both empty");
  if (!cols.empty() && cols.back() >= n) throw ShapeError("column index " + std::to_string(cols.back()) + " out of range");
  if (!rows.empty() && rows.back() >= m) throw ShapeError("row index " + std::to_string(rows.back()) + " out of range");
  if (!std::ranges::is_sorted(cols) || !std::ranges::is_sorted(rows) ||
      std::ranges::adjacent_find(cols) != cols.end() || std::ranges::adjacent_find(rows) != rows.end()) {
    throw ShapeError("index sets must be sorted and distinct");
  }
}

namespace detail {

int hals_rows(DenseMatrix& p, const DenseMatrix& gram, const DenseMatrix& q, int max_passes, double progress) {
  const Index k = p.rows();
  const Index len = p.cols();
  const auto& kern = simd::active_kernels();
  std::vector<double> step(len);
  double first_change = 0.0;
  int passes = 0;
  for (int pass = 0; pass < max_passes; ++pass) {
    double change = 0.0;
    for (Index i = 0; i < k; ++i) {
      const double gii = gram(i, i);
      auto pi = p.row(i);
      if (gii <= 0.0) {
        change += kern.sum_squares(pi.data(), len);
        std::ranges::fill(pi, 0.0);
        continue;
      }
      // step = q_i - sum_l g_il p_l
      std::ranges::copy(q.row(i), step.begin());
      for (Index l = 0; l < k; ++l) {
        const double g = gram(i, l);
        if (g != 0.0) kern.axpy(-g, p.row(l).data(), step.data(), len);
      }
      const double inv = 1.0 / gii;
      for (Index j = 0; j < len; ++j) {
        const double next = std::max(0.0, pi[j] + step[j] * inv);
        const double d = next - pi[j];
        change += d * d;
        pi[j] = next;
      }
    }
    ++passes;
    if (pass == 0) {
      first_change = change;
      if (first_change == 0.0) break;
    } else if (change < progress * first_change) {
      break;
    }
  }
  return passes;
}

}  // namespace detail

namespace {

DenseMatrix residual(const DenseMatrix& m, const DenseMatrix& a, const DenseMatrix& p1, const DenseMatrix& p2,
                     const DenseMatrix& b) {
  DenseMatrix r = m;
  if (a.cols() > 0) add_scaled(r, -1.0, multiply(a, p1));
  if (b.rows() > 0) add_scaled(r, -1.0, multiply(p2, b));
  return r;
}

}  // namespace

GsDecomposition fit_weights(const DenseMatrix& m, const IndexSets& sets, FitOptions opts) {
  sets.validate(m.rows(), m.cols());
  const Index r1 = sets.cols.size();
  const Index r2 = sets.rows.size();

  const DenseMatrix a = select_cols(m, sets.cols);   // m x r1
  const DenseMatrix b = select_rows(m, sets.rows);   // r2 x n
  const DenseMatrix at = transpose(a);                // r1 x m
  const DenseMatrix g1 = multiply_transposed(at, at); // A^T A
  const DenseMatrix g2 = multiply_transposed(b, b);   // B B^T
  const DenseMatrix atm = multiply(at, m);            // A^T M
  const DenseMatrix bmt = multiply_transposed(b, m);  // B M^T

  DenseMatrix p1(r1, m.cols());
  DenseMatrix p2t(r2, m.rows());
  DenseMatrix q1(r1, m.cols());
  DenseMatrix q2t(r2, m.rows());

  GsDecomposition dec;
  dec.sets = sets;
  double objective = frobenius_norm_squared(m);
  dec.objective_history.push_back(objective);
  const double floor = 1e-30 * objective;

  for (int sweep = 0; sweep < opts.inner_iters && objective > floor; ++sweep) {
    if (r1 > 0) {
      // Q1 = A^T (M - P2 B) = A^T M - (A^T P2) B
      q1 = atm;
      if (r2 > 0) add_scaled(q1, -1.0, multiply(multiply_transposed(at, p2t), b));
      detail::hals_rows(p1, g1, q1, opts.max_inner_repeats, opts.inner_progress);
    }
    if (r2 > 0) {
      // Q2^T = B (M - A P1)^T = B M^T - (B P1^T) A^T
      q2t = bmt;
      if (r1 > 0) add_scaled(q2t, -1.0, multiply(multiply_transposed(b, p1), at));
      detail::hals_rows(p2t, g2, q2t, opts.max_inner_repeats, opts.inner_progress);
    }
    const DenseMatrix p2 = transpose(p2t);
    const double next = frobenius_norm_squared(residual(m, a, p1, p2, b));
    dec.objective_history.push_back(next);
    const double decrease = objective - next;
    objective = next;
    if (decrease <= opts.tol * dec.objective_history[dec.objective_history.size() - 2]) break;
  }

  dec.p1 = std::move(p1);
  dec.p2 = transpose(p2t);
  dec.relative_error = relative_error(m, dec);
  return dec;
}

DenseMatrix reconstruct(const DenseMatrix& m, const GsDecomposition& dec) {
  const Index r1 = dec.sets.cols.size();
  const Index r2 = dec.sets.rows.size();
  if (dec.p1.rows() != r1 || dec.p1.cols() != m.cols() || dec.p2.rows() != m.rows() || dec.p2.cols() != r2) {
    throw ShapeError("decomposition weights do not match the matrix and index sets");
  }
  DenseMatrix out(m.rows(), m.cols());
  if (r1 > 0) out = multiply(select_cols(m, dec.sets.cols), dec.p1);
  if (r2 > 0) add_scaled(out, 1.0, multiply(dec.p2, select_rows(m, dec.sets.rows)));
  return out;
}

double relative_error(const DenseMatrix& m, const GsDecomposition& dec) {
  const double norm = frobenius_norm(m);
  if (norm == 0.0) throw DomainError("relative_error: ||M||_F is zero");
  return frobenius_norm(m - reconstruct(m, dec)) / norm;
}

double accuracy(const IndexSets& found, const IndexSets& truth) {
  if (truth.total() == 0) throw DomainError("accuracy: empty ground truth");
  auto hits = [](const std::vector<Index>& a, const std::vector<Index>& b) {
    Index c = 0;
    for (Index x : a) c += std::ranges::find(b, x) != b.end() ? 1 : 0;
    return c;
  };
  return static_cast<double>(hits(truth.cols, found.cols) + hits(truth.rows, found.rows)) /
         static_cast<double>(truth.total());
}

Factors assemble_factors(const DenseMatrix& m, const GsDecomposition& dec) {
  const Index r1 = dec.sets.cols.size();
  const Index r2 = dec.sets.rows.size();
  const Index r = r1 + r2;
  Factors f{DenseMatrix(m.rows(), r), DenseMatrix(r, m.cols())};
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index k = 0; k < r1; ++k) f.w(i, k) = m(i, dec.sets.cols[k]);
    for (Index k = 0; k < r2; ++k) f.w(i, r1 + k) = dec.p2(i, k);
  }
  for (Index k = 0; k < r1; ++k) std::ranges::copy(dec.p1.row(k), f.h.row(k).begin());
  for (Index k = 0; k < r2; ++k) std::ranges::copy(m.row(dec.sets.rows[k]), f.h.row(r1 + k).begin());
  return f;
}

namespace {

// min over permutations pi of ||a - b(:, pi)||_F for column-indexed factors,
// given as rows (a_rows[i] is column i of the factor).
double matched_distance(const DenseMatrix& a_rows, const DenseMatrix& b_rows) {
  const Index r = a_rows.rows();
  DenseMatrix cost(r, r);
  std::vector<double> diff(a_rows.cols());
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < r; ++j) {
      const auto ai = a_rows.row(i);
      const auto bj = b_rows.row(j);
      for (Index t = 0; t < diff.size(); ++t) diff[t] = ai[t] - bj[t];
      cost(i, j) = simd::sum_squares(diff);
    }
  }
  const auto match = solve_assignment(cost);
  double total = 0.0;
  for (Index i = 0; i < r; ++i) total += cost(i, match[i]);
  return std::sqrt(total);
}

}  // namespace

double distance_to_ground_truth(const DenseMatrix& w, const DenseMatrix& h, const GroundTruth& truth) {
  const Index r = truth.w_star.cols();
  if (truth.h_star.rows() != r || w.cols() != r || h.rows() != r) {
    throw ShapeError("distance_to_ground_truth: rank mismatch");
  }
  if (w.rows() != truth.w_star.rows() || h.cols() != truth.h_star.cols()) {
    throw ShapeError("distance_to_ground_truth: factor shapes differ from the ground truth");
  }
  const double dw = matched_distance(transpose(truth.w_star), transpose(w)) / (2.0 * frobenius_norm(truth.w_star));
  const double dh = matched_distance(truth.h_star, h) / (2.0 * frobenius_norm(truth.h_star));
  return dw + dh;
}

NmfResult nmf_ahals(const DenseMatrix& m, Index r, int iters, std::uint64_t seed, NmfOptions opts) {
  if (r == 0 || r > std::min(m.rows(), m.cols())) throw DomainError("nmf_ahals: rank must be in [1, min(m, n)]");
  Rng rng(seed);
  DenseMatrix wt(r, m.rows());
  DenseMatrix h(r, m.cols());
  for (double& v : wt.values()) v = rng.uniform();
  for (double& v : h.values()) v = rng.uniform();

  // Optimal scaling of the random start: alpha = <M, WH> / ||WH||^2.
  {
    const DenseMatrix wh = multiply(transpose(wt), h);
    const double num = simd::dot(m.values(), wh.values());
    const double den = frobenius_norm_squared(wh);
    if (den > 0.0 && num > 0.0) {
      const double s = std::sqrt(num / den);
      simd::scale(s, wt.values());
      simd::scale(s, h.values());
    }
  }

  const DenseMatrix mt = transpose(m);
  auto error = [&] { return frobenius_norm(m - multiply(transpose(wt), h)); };

  NmfResult res;
  res.residual_history.push_back(error());
  for (int it = 0; it < iters; ++it) {
    // W block: rows of W^T against Gram H H^T and H M^T.
    detail::hals_rows(wt, multiply_transposed(h, h), multiply_transposed(h, m), opts.max_inner_repeats,
                      opts.inner_progress);
    // H block: Gram W^T W and W^T M.
    detail::hals_rows(h, multiply_transposed(wt, wt), multiply_transposed(wt, mt), opts.max_inner_repeats,
                      opts.inner_progress);
    res.residual_history.push_back(error());
  }
  res.w = transpose(wt);
  res.h = std::move(h);
  return res;
}

}  // namespace gsnmf
