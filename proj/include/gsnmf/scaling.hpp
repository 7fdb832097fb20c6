#pragma once

#include <vector>

#include "gsnmf/matrix.hpp"

namespace gsnmf {

struct ScalingResult {
  DenseMatrix scaled;                // diag(row_factors) * M * diag(col_factors)
  std::vector<double> row_factors;   // length m, > 0
  std::vector<double> col_factors;   // length n, > 0
  bool converged = false;
  int iterations = 0;
};

struct ScalingOptions {
  double tol = 1e-9;      // max relative deviation of any row or column l1 norm
  int max_iter = 10000;
};

// Alternating row/column equilibration: after convergence every column has
// l1 norm k1 and every row has l1 norm k2. Requires n * k1 == m * k2.
// Throws ScalingError if M has an all-zero row or column; a run that hits
// max_iter returns with converged == false.
ScalingResult sinkhorn_scale(const DenseMatrix& m, double k1, double k2, ScalingOptions opts = {});

// Default targets k1 = m, k2 = n.
ScalingResult sinkhorn_scale(const DenseMatrix& m, ScalingOptions opts = {});

}  // namespace gsnmf
