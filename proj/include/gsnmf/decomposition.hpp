#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gsnmf/matrix.hpp"

namespace gsnmf {

// Selected columns (K1) and rows (K2), 0-based, sorted, distinct.
struct IndexSets {
  std::vector<Index> cols;
  std::vector<Index> rows;

  IndexSets() = default;
  // Sorts both lists; throws ShapeError on duplicates.
  IndexSets(std::vector<Index> cols, std::vector<Index> rows);

  Index total() const noexcept { return cols.size() + rows.size(); }
  // Throws ShapeError if an index is out of range for an m x n matrix or both sets are empty.
  void validate(Index m, Index n) const;

  bool operator==(const IndexSets&) const = default;
};

// M ~ M(:, K1) P1 + P2 M(K2, :)
struct GsDecomposition {
  IndexSets sets;
  DenseMatrix p1;  // r1 x n, >= 0
  DenseMatrix p2;  // m x r2, >= 0
  double relative_error = 1.0;
  // Squared residual after each sweep of the fitting solver (index 0 = start).
  std::vector<double> objective_history;
};

struct FitOptions {
  int inner_iters = 500;
  double tol = 1e-8;  // stop when the relative objective decrease of a sweep is below this
  int max_inner_repeats = 10;
  double inner_progress = 0.01;
};

// Nonnegative least squares for (P1, P2) with the index sets fixed, by
// block coordinate descent (HALS row updates of P1, then of P2^T) from
// P1 = 0, P2 = 0. Basis columns/rows with zero norm get zero coefficients.
GsDecomposition fit_weights(const DenseMatrix& m, const IndexSets& sets, FitOptions opts = {});

// M(:, K1) P1 + P2 M(K2, :)
DenseMatrix reconstruct(const DenseMatrix& m, const GsDecomposition& dec);

// ||M - M(:,K1) P1 - P2 M(K2,:)||_F / ||M||_F. Throws DomainError if M = 0.
double relative_error(const DenseMatrix& m, const GsDecomposition& dec);

// (|K1* n K1| + |K2* n K2|) / (|K1*| + |K2*|). Throws DomainError on empty truth.
double accuracy(const IndexSets& found, const IndexSets& truth);

struct GroundTruth {
  IndexSets sets;
  DenseMatrix w_star;  // m x r
  DenseMatrix h_star;  // r x n
};

struct Factors {
  DenseMatrix w;  // m x r
  DenseMatrix h;  // r x n
};

// W = [M(:, K1), P2], H = [P1; M(K2, :)]
Factors assemble_factors(const DenseMatrix& m, const GsDecomposition& dec);

// min_pw ||W* - W(:, pw)||_F / (2 ||W*||_F) + min_ph ||H* - H(ph, :)||_F / (2 ||H*||_F),
// each permutation found independently by optimal assignment.
double distance_to_ground_truth(const DenseMatrix& w, const DenseMatrix& h, const GroundTruth& truth);

struct NmfResult {
  DenseMatrix w;
  DenseMatrix h;
  std::vector<double> residual_history;  // ||M - WH||_F, index 0 = initial point
};

struct NmfOptions {
  int max_inner_repeats = 10;
  double inner_progress = 0.01;  // repeat a block while its change is >= this fraction of the first
};

// Accelerated HALS: alternating exact column updates of W and row updates of H.
NmfResult nmf_ahals(const DenseMatrix& m, Index r, int iters, std::uint64_t seed, NmfOptions opts = {});

namespace detail {
// HALS passes over the rows of `p` for the quadratic with Gram matrix `gram`
// and linear term `q`: row k becomes max(0, p_k + (q_k - gram_k p) / gram_kk).
// Passes repeat while the squared change stays above `progress` times the
// first pass's change.
// Returns the number of passes made.
int hals_rows(DenseMatrix& p, const DenseMatrix& gram, const DenseMatrix& q, int max_passes, double progress);
}  // namespace detail

}  // namespace gsnmf
