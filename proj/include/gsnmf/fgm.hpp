#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "gsnmf/decomposition.hpp"
#include "gsnmf/matrix.hpp"

namespace gsnmf {

// Feasible set for the self-expressive weights.
//
// Row-constrained (the set for X, n x n): each row i satisfies
//   0 <= X(i,j) <= 1 and w_i X(i,j) <= w_j X(i,i),
// with w_j the l1 norm of column j of M. Column-constrained (the set for Y,
// m x m) is the same condition on each column t of Y with the row l1 norms.
struct OmegaSpec {
  enum class Orientation { row_constrained, column_constrained };
  std::vector<double> weights;
  Orientation orientation = Orientation::row_constrained;
};

OmegaSpec omega_for_columns(const DenseMatrix& m);  // set for X
OmegaSpec omega_for_rows(const DenseMatrix& m);     // set for Y

// Exact Euclidean projection of x onto
//   { v : 0 <= v_diag <= 1, 0 <= v_j <= min(1, (w_j / w_diag) v_diag) for j != diag }.
std::vector<double> project_row_omega(std::span<const double> x, Index diag, std::span<const double> weights);
void project_row_omega_inplace(std::span<double> x, Index diag, std::span<const double> weights);

DenseMatrix project_omega1(const DenseMatrix& x, const OmegaSpec& spec);  // row-wise
DenseMatrix project_omega2(const DenseMatrix& y, const OmegaSpec& spec);  // column-wise

// Largest violation of the set constraints (0 when feasible), in the
// normalized form X(i,j) - (w_j / w_i) X(i,i).
double omega_violation(const DenseMatrix& z, const OmegaSpec& spec);

struct FgmConfig {
  double lambda_tilde = 0.25;
  int max_iter = 1000;
  double delta = 1e-4;
  double alpha0 = 0.05;
  double lipschitz_inflation = 1.01;
};

struct FgmInit {
  DenseMatrix x0;  // n x n
  DenseMatrix y0;  // m x m
  double lambda = 0.0;
  IndexSets sets;  // the GSPA selection the start was built from
};

// GSPA for r indices, optimal weights on that selection, then
// lambda = lambda_tilde * ||M - M X0 - Y0 M||_F / (2 r).
FgmInit init_fgm(const DenseMatrix& m, Index r, double lambda_tilde, FitOptions fit = {});

struct SelfExpressiveSolution {
  DenseMatrix x;  // n x n, in the column set
  DenseMatrix y;  // m x m, in the row set
  std::vector<double> objective_history;  // F at the projected iterates, index 0 = start
  double lambda = 0.0;
  int iterations = 0;
};

// F(X, Y) = 1/2 ||M - MX - YM||_F^2 + lambda (tr X + tr Y)
double fgm_objective(const DenseMatrix& m, const DenseMatrix& x, const DenseMatrix& y, double lambda);

struct FgmGradients {
  DenseMatrix gx;  // M^T M X + M^T Y M - M^T M + lambda I
  DenseMatrix gy;  // M X M^T + Y M M^T - M M^T + lambda I
};
FgmGradients fgm_gradients(const DenseMatrix& m, const DenseMatrix& x, const DenseMatrix& y, double lambda);

// Accelerated projected gradient on F over the two sets. Without `init`,
// init_fgm(m, r1 + r2, cfg.lambda_tilde) supplies the start. The start is
// projected onto the sets; the returned pair is the projected iterate with
// the lowest objective. If `log` is set, a CSV line
// "iteration,objective,violation,step_seconds" is written per iteration.
SelfExpressiveSolution gsfgm_solve(const DenseMatrix& m, Index r1, Index r2, const FgmConfig& cfg = {},
                                   const std::optional<FgmInit>& init = std::nullopt, std::ostream* log = nullptr);

// K1 = r1 largest diag(X), K2 = r2 largest diag(Y); ties go to the smaller index.
IndexSets post_process_diagonal(const DenseMatrix& x, const DenseMatrix& y, Index r1, Index r2);

// Candidates ordered by SPA on X^T (columns) and on Y (rows); then r greedy
// picks, each taking whichever next candidate leaves the smaller residual of M
// after projecting onto its orthogonal complement.
IndexSets post_process_real_data(const DenseMatrix& m, const DenseMatrix& x, const DenseMatrix& y, Index r);

}  // namespace gsnmf
