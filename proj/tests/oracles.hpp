#pragma once
// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "gsnmf/decomposition.hpp"
#include "gsnmf/matrix.hpp"
#include "gsnmf/random.hpp"

namespace oracle {

using gsnmf::DenseMatrix;
using gsnmf::Index;

inline Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

inline DenseMatrix from_eigen(const Eigen::MatrixXd& e) {
  DenseMatrix m(e.rows(), e.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = e(i, j);
  return m;
}

inline DenseMatrix random_matrix(Index rows, Index cols, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  gsnmf::Rng rng(seed);
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = lo + (hi - lo) * rng.uniform();
  return m;
}

// Largest singular value from a dense symmetric eigensolver on M^T M.
inline double sigma_max(const DenseMatrix& m) {
  const Eigen::MatrixXd e = to_eigen(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.transpose() * e);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// Lawson-Hanson active-set NNLS: min ||A x - b|| subject to x >= 0.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iter = 10000) {
  const Index n = a.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-12 * std::max(1.0, a.norm() * b.norm());
  for (int outer = 0; outer < max_iter; ++outer) {
    const Eigen::VectorXd w = a.transpose() * (b - a * x);
    Index best = n;
    double best_w = tol;
    for (Index j = 0; j < n; ++j) {
      if (!passive[j] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best == n) break;
    passive[best] = true;
    for (int inner = 0; inner < max_iter; ++inner) {
      std::vector<Index> idx;
      for (Index j = 0; j < n; ++j)
        if (passive[j]) idx.push_back(j);
      Eigen::MatrixXd ap(a.rows(), idx.size());
      for (Index k = 0; k < idx.size(); ++k) ap.col(k) = a.col(idx[k]);
      const Eigen::VectorXd zp = ap.colPivHouseholderQr().solve(b);
      Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
      for (Index k = 0; k < idx.size(); ++k) z(idx[k]) = zp(k);
      bool all_positive = true;
      for (Index j : idx) all_positive = all_positive && z(j) > 0;
      if (all_positive) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (Index j : idx)
        if (z(j) <= 0) alpha = std::min(alpha, x(j) / (x(j) - z(j)));
      x += alpha * (z - x);
      for (Index j : idx)
        if (x(j) <= 1e-15) {
          x(j) = 0;
          passive[j] = false;
        }
    }
  }
  return x;
}

// Exact optimum of min ||M - M(:,K1) P1 - P2 M(K2,:)||_F over P >= 0, as one NNLS
// on the vectorized unknowns (vec is column-major).
inline double gs_fit_relative_error(const DenseMatrix& m, const gsnmf::IndexSets& sets) {
  const Eigen::MatrixXd e = to_eigen(m);
  const Index rows = m.rows(), cols = m.cols();
  const Index r1 = sets.cols.size(), r2 = sets.rows.size();
  Eigen::MatrixXd a(rows, r1), bm(r2, cols);
  for (Index k = 0; k < r1; ++k) a.col(k) = e.col(sets.cols[k]);
  for (Index k = 0; k < r2; ++k) bm.row(k) = e.row(sets.rows[k]);
  // vec(A P1) = (I_n kron A) vec(P1); vec(P2 B) = (B^T kron I_m) vec(P2)
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(rows * cols, r1 * cols + rows * r2);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      for (Index k = 0; k < r1; ++k) g(j * rows + i, j * r1 + k) = a(i, k);
      for (Index k = 0; k < r2; ++k) g(j * rows + i, r1 * cols + k * rows + i) = bm(k, j);
    }
  const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(e.data(), rows * cols);
  const Eigen::VectorXd x = nnls(g, target);
  return (g * x - target).norm() / e.norm();
}

// Projected gradient on the same problem, in matrix form.
inline double gs_fit_objective_pg(const DenseMatrix& m, const gsnmf::IndexSets& sets, int iters) {
  const Eigen::MatrixXd e = to_eigen(m);
  const Index r1 = sets.cols.size(), r2 = sets.rows.size();
  Eigen::MatrixXd a(m.rows(), r1), b(r2, m.cols());
  for (Index k = 0; k < r1; ++k) a.col(k) = e.col(sets.cols[k]);
  for (Index k = 0; k < r2; ++k) b.row(k) = e.row(sets.rows[k]);
  Eigen::MatrixXd p1 = Eigen::MatrixXd::Zero(r1, m.cols()), p2 = Eigen::MatrixXd::Zero(m.rows(), r2);
  // Lipschitz constant of the joint gradient is at most ||A||^2 + ||B||^2 (spectral).
  const double la = a.operatorNorm(), lb = b.operatorNorm();
  const double step = 1.0 / (la * la + lb * lb);
  for (int t = 0; t < iters; ++t) {
    const Eigen::MatrixXd r = e - a * p1 - p2 * b;
    p1 = (p1 + step * a.transpose() * r).cwiseMax(0.0);
    p2 = (p2 + step * r * b.transpose()).cwiseMax(0.0);
  }
  return 0.5 * (e - a * p1 - p2 * b).squaredNorm();
}

// Projection onto {v : 0 <= v <= 1, v_j <= c_j v_d}. With v_d free, enumerate which
// constraint is tight on each coordinate; v_d then solves a 1-D quadratic. Degenerate
// vertices (two constraints tight on one coordinate) pin v_d to a kink value, and for a
// fixed v_d the coordinates separate.
inline std::vector<double> project_row_enumerate(const std::vector<double>& x, Index d, const std::vector<double>& w) {
  const Index n = x.size();
  std::vector<double> c(n);
  for (Index j = 0; j < n; ++j) c[j] = w[j] / w[d];
  std::vector<Index> others;
  for (Index j = 0; j < n; ++j)
    if (j != d) others.push_back(j);
  const Index k = others.size();
  std::vector<double> best;
  double best_val = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<double>& v) {
    bool feasible = v[d] >= -1e-15 && v[d] <= 1 + 1e-15;
    for (Index j : others) feasible = feasible && v[j] >= -1e-15 && v[j] <= 1 + 1e-15 && v[j] <= c[j] * v[d] + 1e-15;
    if (!feasible) return;
    double val = 0.0;
    for (Index j = 0; j < n; ++j) val += (v[j] - x[j]) * (v[j] - x[j]);
    if (val < best_val) {
      best_val = val;
      best = v;
    }
  };

  Index combos = 1;
  for (Index t = 0; t < k; ++t) combos *= 4;  // free, 0, 1, tied to c_j v_d
  std::vector<double> v(n);
  for (Index code = 0; code < combos; ++code) {
    double num = x[d], den = 1.0;
    Index cc = code;
    std::vector<int> state(k);
    for (Index t = 0; t < k; ++t) {
      state[t] = static_cast<int>(cc % 4);
      cc /= 4;
      if (state[t] == 3) {
        num += c[others[t]] * x[others[t]];
        den += c[others[t]] * c[others[t]];
      }
    }
    v[d] = num / den;
    for (Index t = 0; t < k; ++t) {
      const Index j = others[t];
      v[j] = state[t] == 0 ? x[j] : state[t] == 1 ? 0.0 : state[t] == 2 ? 1.0 : c[j] * v[d];
    }
    consider(v);
  }

  std::vector<double> fixed = {0.0, 1.0};
  for (Index j : others) {
    fixed.push_back(1.0 / c[j]);
    fixed.push_back(x[j] / c[j]);
  }
  for (double vd : fixed) {
    if (vd < 0.0 || vd > 1.0) continue;
    v[d] = vd;
    for (Index j : others) v[j] = std::clamp(x[j], 0.0, std::min(1.0, c[j] * vd));
    consider(v);
  }
  return best;
}

// Dykstra's alternating projections onto the box and the halfspaces v_j - c_j v_d <= 0.
inline std::vector<double> project_row_dykstra(const std::vector<double>& x, Index d, const std::vector<double>& w,
                                               int iters = 200000) {
  const Index n = x.size();
  const Index sets = n;  // box + (n - 1) halfspaces
  std::vector<std::vector<double>> inc(sets, std::vector<double>(n, 0.0));
  std::vector<double> v = x;
  for (int it = 0; it < iters; ++it) {
    double change = 0.0;
    Index s = 0;
    for (Index j = 0; j <= n; ++j) {
      if (j == d) continue;
      std::vector<double> y(n);
      for (Index t = 0; t < n; ++t) y[t] = v[t] + inc[s][t];
      std::vector<double> p = y;
      if (j == n) {
        for (double& t : p) t = std::clamp(t, 0.0, 1.0);
      } else {
        const double c = w[j] / w[d];
        const double viol = y[j] - c * y[d];
        if (viol > 0) {
          const double nn = 1.0 + c * c;
          p[j] -= viol / nn;
          p[d] += c * viol / nn;
        }
      }
      for (Index t = 0; t < n; ++t) {
        inc[s][t] = y[t] - p[t];
        change = std::max(change, std::abs(p[t] - v[t]));
      }
      v = p;
      ++s;
    }
    if (change < 1e-15 && it > 10) break;
  }
  return v;
}

// Exhaustive minimum of ||A - B(:, perm)||_F over all column permutations.
inline double min_over_permutations_cols(const DenseMatrix& a, const DenseMatrix& b) {
  std::vector<Index> perm(a.cols());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (Index i = 0; i < a.rows(); ++i)
      for (Index k = 0; k < a.cols(); ++k) {
        const double d = a(i, k) - b(i, perm[k]);
        s += d * d;
      }
    best = std::min(best, std::sqrt(s));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace oracle
