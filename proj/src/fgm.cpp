#include "gsnmf/fgm.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <numeric>
#include <ostream>

#include "gsnmf/error.hpp"
#include "gsnmf/io.hpp"
#include "gsnmf/simd/kernels.hpp"
#include "gsnmf/spa.hpp"

namespace gsnmf {

OmegaSpec omega_for_columns(const DenseMatrix& m) {
  return {col_l1_norms(m), OmegaSpec::Orientation::row_constrained};
}

OmegaSpec omega_for_rows(const DenseMatrix& m) {
  return {row_l1_norms(m), OmegaSpec::Orientation::column_constrained};
}

void project_row_omega_inplace(std::span<double> x, Index diag, std::span<const double> weights) {
  const Index n = x.size();
  if (weights.size() != n || diag >= n) throw ShapeError("project_row_omega: weights/diagonal do not match");
  const double wd = weights[diag];
  if (!(wd > 0.0)) throw DomainError("project_row_omega: weights must be positive");

  // For a fixed diagonal value d, coordinate j clips to [0, min(1, c_j d)].
  // Its squared distance is (x_j - c_j d)^2 while c_j d < min(x_j, 1) and
  // constant afterwards, so the total is a convex piecewise quadratic in d
  // with breakpoints t_j = min(x_j, 1) / c_j.
  struct Breakpoint {
    double t;
    double cx;  // c_j x_j
    double cc;  // c_j^2
  };
  std::vector<Breakpoint> bps;
  bps.reserve(n);
  double s1 = 0.0;
  double s2 = 0.0;
  for (Index j = 0; j < n; ++j) {
    if (j == diag || !(x[j] > 0.0)) continue;
    const double c = weights[j] / wd;
    const Breakpoint bp{std::min(x[j], 1.0) / c, c * x[j], c * c};
    s1 += bp.cx;
    s2 += bp.cc;
    bps.push_back(bp);
  }
  std::ranges::sort(bps, {}, &Breakpoint::t);

  const double xd = x[diag];
  double lo = 0.0;
  double d = 1.0;
  for (Index k = 0;; ++k) {
    const double hi = k < bps.size() ? bps[k].t : std::numeric_limits<double>::infinity();
    const double cand = (xd + s1) / (1.0 + s2);
    if (cand <= hi || lo >= 1.0) {
      d = std::max(cand, lo);
      break;
    }
    lo = hi;
    s1 -= bps[k].cx;
    s2 -= bps[k].cc;
  }
  d = std::clamp(d, 0.0, 1.0);

  for (Index j = 0; j < n; ++j) {
    if (j == diag) continue;
    const double upper = std::min(1.0, weights[j] / wd * d);
    x[j] = std::clamp(x[j], 0.0, upper);
  }
  x[diag] = d;
}

std::vector<double> project_row_omega(std::span<const double> x, Index diag, std::span<const double> weights) {
  std::vector<double> out(x.begin(), x.end());
  project_row_omega_inplace(out, diag, weights);
  return out;
}

namespace {

void project_rows_inplace(DenseMatrix& x, std::span<const double> weights) {
  for (Index i = 0; i < x.rows(); ++i) project_row_omega_inplace(x.row(i), i, weights);
}

void project_cols_inplace(DenseMatrix& y, std::span<const double> weights) {
  std::vector<double> col(y.rows());
  for (Index t = 0; t < y.cols(); ++t) {
    for (Index l = 0; l < y.rows(); ++l) col[l] = y(l, t);
    project_row_omega_inplace(col, t, weights);
    for (Index l = 0; l < y.rows(); ++l) y(l, t) = col[l];
  }
}

void check_square(const DenseMatrix& z, const OmegaSpec& spec) {
  if (z.rows() != z.cols() || z.rows() != spec.weights.size()) {
    throw ShapeError("omega projection: matrix must be square and match the weight vector");
  }
}

}  // namespace

DenseMatrix project_omega1(const DenseMatrix& x, const OmegaSpec& spec) {
  check_square(x, spec);
  DenseMatrix out = x;
  project_rows_inplace(out, spec.weights);
  return out;
}

DenseMatrix project_omega2(const DenseMatrix& y, const OmegaSpec& spec) {
  check_square(y, spec);
  DenseMatrix out = y;
  project_cols_inplace(out, spec.weights);
  return out;
}

double omega_violation(const DenseMatrix& z, const OmegaSpec& spec) {
  check_square(z, spec);
  const bool by_row = spec.orientation == OmegaSpec::Orientation::row_constrained;
  const auto& w = spec.weights;
  double worst = 0.0;
  for (Index a = 0; a < z.rows(); ++a) {
    for (Index b = 0; b < z.cols(); ++b) {
      const double v = z(a, b);
      worst = std::max({worst, -v, v - 1.0});
      // by row: diag index a, off index b; by column: diag index b, off index a
      const Index dg = by_row ? a : b;
      const Index off = by_row ? b : a;
      const double dv = by_row ? z(a, a) : z(b, b);
      worst = std::max(worst, v - w[off] / w[dg] * dv);
    }
  }
  return worst;
}

FgmInit init_fgm(const DenseMatrix& m, Index r, double lambda_tilde, FitOptions fit) {
  if (r == 0) throw DomainError("init_fgm: r must be at least 1");
  FgmInit init;
  init.sets = gspa(m, std::min(r, m.rows() + m.cols())).sets;
  init.x0 = DenseMatrix(m.cols(), m.cols());
  init.y0 = DenseMatrix(m.rows(), m.rows());
  if (init.sets.total() == 0) return init;

  const GsDecomposition dec = fit_weights(m, init.sets, fit);
  for (Index k = 0; k < init.sets.cols.size(); ++k)
    std::ranges::copy(dec.p1.row(k), init.x0.row(init.sets.cols[k]).begin());
  for (Index k = 0; k < init.sets.rows.size(); ++k)
    for (Index l = 0; l < m.rows(); ++l) init.y0(l, init.sets.rows[k]) = dec.p2(l, k);

  const DenseMatrix resid = m - multiply(m, init.x0) - multiply(init.y0, m);
  init.lambda = lambda_tilde * frobenius_norm(resid) / (2.0 * static_cast<double>(r));
  return init;
}

namespace {

double trace(const DenseMatrix& z) {
  double t = 0.0;
  for (Index i = 0; i < z.rows(); ++i) t += z(i, i);
  return t;
}

// R = M - M X - Y M
void residual_into(const DenseMatrix& m, const DenseMatrix& x, const DenseMatrix& y, DenseMatrix& mx,
                   DenseMatrix& ym, DenseMatrix& r) {
  multiply_into(m, x, mx);
  multiply_into(y, m, ym);
  r = m;
  add_scaled(r, -1.0, mx);
  add_scaled(r, -1.0, ym);
}

double squared_distance(const DenseMatrix& a, const DenseMatrix& b) {
  const auto av = a.values();
  const auto bv = b.values();
  double s = 0.0;
  for (Index k = 0; k < av.size(); ++k) {
    const double d = av[k] - bv[k];
    s += d * d;
  }
  return s;
}

}  // namespace

double fgm_objective(const DenseMatrix& m, const DenseMatrix& x, const DenseMatrix& y, double lambda) {
  DenseMatrix mx, ym, r;
  residual_into(m, x, y, mx, ym, r);
  return 0.5 * frobenius_norm_squared(r) + lambda * (trace(x) + trace(y));
}

FgmGradients fgm_gradients(const DenseMatrix& m, const DenseMatrix& x, const DenseMatrix& y, double lambda) {
  DenseMatrix mx, ym, r;
  residual_into(m, x, y, mx, ym, r);
  FgmGradients g{multiply(transpose(m), r), multiply_transposed(r, m)};
  simd::scale(-1.0, g.gx.values());
  simd::scale(-1.0, g.gy.values());
  for (Index i = 0; i < g.gx.rows(); ++i) g.gx(i, i) += lambda;
  for (Index i = 0; i < g.gy.rows(); ++i) g.gy(i, i) += lambda;
  return g;
}

SelfExpressiveSolution gsfgm_solve(const DenseMatrix& m, Index r1, Index r2, const FgmConfig& cfg,
                                   const std::optional<FgmInit>& init, std::ostream* log) {
  if (m.empty() || frobenius_norm_squared(m) == 0.0) throw DomainError("gsfgm: input matrix is zero");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw DomainError("gsfgm: delta must lie in (0, 1)");
  if (!(cfg.alpha0 > 0.0 && cfg.alpha0 < 1.0)) throw DomainError("gsfgm: alpha0 must lie in (0, 1)");
  const OmegaSpec omega1 = omega_for_columns(m);
  const OmegaSpec omega2 = omega_for_rows(m);
  auto positive = [](double w) { return w > 0.0; };
  if (!std::ranges::all_of(omega1.weights, positive) || !std::ranges::all_of(omega2.weights, positive)) {
    throw DomainError("gsfgm: every row and column of M needs a positive l1 norm");
  }

  FgmInit start = init ? *init : init_fgm(m, std::max<Index>(r1 + r2, 1), cfg.lambda_tilde);
  if (start.x0.rows() != m.cols() || start.x0.cols() != m.cols() || start.y0.rows() != m.rows() ||
      start.y0.cols() != m.rows()) {
    throw ShapeError("gsfgm: initial X/Y do not match M");
  }
  const double lambda = start.lambda;
  const double sigma = spectral_norm_estimate(m);
  const double lip = cfg.lipschitz_inflation * 2.0 * sigma * sigma;
  const double step = 1.0 / lip;
  const DenseMatrix mt = transpose(m);

  SelfExpressiveSolution sol;
  sol.lambda = lambda;

  // Projected iterates (x, y) and their predecessors; momentum point (xm, ym).
  DenseMatrix x = project_omega1(start.x0, omega1);
  DenseMatrix y = project_omega2(start.y0, omega2);
  DenseMatrix mx, ymat, resid;
  residual_into(m, x, y, mx, ymat, resid);
  auto objective = [&](const DenseMatrix& r, const DenseMatrix& a, const DenseMatrix& b) {
    return 0.5 * frobenius_norm_squared(r) + lambda * (trace(a) + trace(b));
  };
  double e_prev = objective(resid, x, y);
  if (!std::isfinite(e_prev)) throw DomainError("gsfgm: non-finite objective at the start");
  sol.objective_history.push_back(e_prev);
  sol.x = x;
  sol.y = y;
  double best = e_prev;

  DenseMatrix xm = x, ym = y, resid_m = resid;
  DenseMatrix xn, yn, resid_n, gx, gy;
  double alpha = cfg.alpha0;
  double first_move = 0.0;

  if (log) *log << "iteration,objective,violation,step_seconds\n";

  for (int k = 1; k <= cfg.max_iter; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    // grad_X = -M^T R + lambda I, grad_Y = -R M^T + lambda I at the momentum point
    multiply_into(mt, resid_m, gx);
    multiply_transposed_into(resid_m, m, gy);
    xn = xm;
    yn = ym;
    add_scaled(xn, step, gx);
    add_scaled(yn, step, gy);
    for (Index i = 0; i < xn.rows(); ++i) xn(i, i) -= step * lambda;
    for (Index i = 0; i < yn.rows(); ++i) yn(i, i) -= step * lambda;
    project_rows_inplace(xn, omega1.weights);
    project_cols_inplace(yn, omega2.weights);

    residual_into(m, xn, yn, mx, ymat, resid_n);
    const double e = objective(resid_n, xn, yn);
    if (!std::isfinite(e)) throw DomainError("gsfgm: objective became non-finite (step size too large?)");
    const double move = std::sqrt(squared_distance(xn, x) + squared_distance(yn, y));
    if (k == 1) first_move = move;

    // alpha_k >= 0 with alpha_k^2 = (1 - alpha_k) alpha_{k-1}^2
    const double a2 = alpha * alpha;
    const double alpha_next = 0.5 * (std::sqrt(a2 * a2 + 4.0 * a2) - a2);
    const double beta = alpha * (1.0 - alpha) / (a2 + alpha_next);
    alpha = alpha_next;

    // Momentum: Z_m = Z_n + beta (Z_n - Z_prev); the residual is affine in Z.
    xm = xn;
    ym = yn;
    add_scaled(xm, beta, xn - x);
    add_scaled(ym, beta, yn - y);
    resid_m = resid_n;
    simd::scale(1.0 + beta, resid_m.values());
    add_scaled(resid_m, -beta, resid);

    x = std::move(xn);
    y = std::move(yn);
    resid = std::move(resid_n);
    sol.objective_history.push_back(e);
    sol.iterations = k;
    if (e < best) {
      best = e;
      sol.x = x;
      sol.y = y;
    }
    if (log) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      *log << k << ',' << io::format_double(e) << ','
           << io::format_double(std::max(omega_violation(x, omega1), omega_violation(y, omega2))) << ','
           << io::format_double(secs) << '\n';
    }

    const bool small_change = e_prev > 0.0 ? std::abs(e - e_prev) / e_prev <= cfg.delta : e == 0.0;
    const bool small_move = k > 1 && move <= cfg.delta * first_move;
    e_prev = e;
    if (small_change || small_move) break;
  }
  return sol;
}

IndexSets post_process_diagonal(const DenseMatrix& x, const DenseMatrix& y, Index r1, Index r2) {
  if (r1 > x.rows() || r2 > y.rows()) throw DomainError("post_process_diagonal: rank exceeds dimension");
  auto top = [](const DenseMatrix& z, Index r) {
    std::vector<Index> idx(z.rows());
    std::iota(idx.begin(), idx.end(), Index{0});
    std::ranges::stable_sort(idx, [&](Index a, Index b) { return z(a, a) > z(b, b); });
    idx.resize(r);
    return idx;
  };
  return IndexSets(top(x, r1), top(y, r2));
}

IndexSets post_process_real_data(const DenseMatrix& m, const DenseMatrix& x, const DenseMatrix& y, Index r) {
  if (r == 0) throw DomainError("post_process_real_data: r must be at least 1");
  const std::vector<Index> col_order = spa(transpose(x), std::min(r, x.rows())).indices;
  const std::vector<Index> row_order = spa(y, std::min(r, y.cols())).indices;

  DenseMatrix resid = m;
  std::vector<Index> cols, rows;
  Index ci = 0, ri = 0;
  for (Index step = 0; step < r; ++step) {
    const bool have_col = ci < col_order.size();
    const bool have_row = ri < row_order.size();
    if (!have_col && !have_row) break;
    DenseMatrix after_col, after_row;
    double col_norm = std::numeric_limits<double>::infinity();
    double row_norm = std::numeric_limits<double>::infinity();
    if (have_col) {
      after_col = resid;
      detail::deflate_column(after_col, col_order[ci]);
      col_norm = frobenius_norm(after_col);
    }
    if (have_row) {
      after_row = resid;
      detail::deflate_row(after_row, row_order[ri]);
      row_norm = frobenius_norm(after_row);
    }
    if (col_norm <= row_norm) {
      cols.push_back(col_order[ci++]);
      resid = std::move(after_col);
    } else {
      rows.push_back(row_order[ri++]);
      resid = std::move(after_row);
    }
  }
  return IndexSets(std::move(cols), std::move(rows));
}

}  // namespace gsnmf
