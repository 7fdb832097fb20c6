#pragma once

#include <cstdint>
#include <filesystem>

#include "gsnmf/decomposition.hpp"
#include "gsnmf/matrix.hpp"

namespace gsnmf {

// A generated instance. All stored quantities live in the permuted frame that
// the algorithms see: M(i, j) = clamp(Ms + N)(row_perm[i], col_perm[j]).
struct SyntheticInstance {
  DenseMatrix m;        // noisy, permuted, nonnegative
  DenseMatrix clean;    // permuted noiseless scaled matrix, = W* H*
  GroundTruth truth;    // index sets and factors in the permuted frame
  double noise_level = 0.0;
  double noise_ratio = 0.0;  // ||N||_F / ||Ms||_F before clamping
  Permutation row_perm;
  Permutation col_perm;
  std::uint64_t seed = 0;
};

// Fully random (r1, r2)-separable instance:
//   [[W1, W1 H1 + W2 H2], [0, H2]], W1, H2 uniform on [0, 1], H1, W2
// sparse uniform (density 1/2), equilibrated, Gaussian noise of relative
// Frobenius size eps, clamped at zero, then rows and columns permuted.
SyntheticInstance gen_fully_random(Index m, Index n, Index r1, Index r2, double eps, std::uint64_t seed);

// Middle-point instance with adversarial noise, 78 x 55 with (r1, r2) = (10, 12).
SyntheticInstance gen_middle_point(double eps, std::uint64_t seed);

inline constexpr Index kMiddlePointRows = 78;
inline constexpr Index kMiddlePointCols = 55;
inline constexpr Index kMiddlePointR1 = 10;
inline constexpr Index kMiddlePointR2 = 12;

// The 5 x 5 (2,2)-separable matrix on which GSPA fails:
//   [[W1, W1 H1 + W2 H2], [0, H2]] with W1 = [[1, eps], [1, 2], [1, 3]],
//   H1 = [[eps, 2 eps, 3 eps], [eps, 1, 2]], H2 = W1^T, W2 = H1^T.
DenseMatrix example1_matrix(double eps = 0.001);

// Published 3-decimal equilibration of example1_matrix(0.001) (row and column sums 5).
DenseMatrix example1_scaled_reference();

// 3 x n matrix with columns e1, e2, (1/2, 0, 1/2), (0, 1/2, 1/2) followed by
// n - 4 distinct points on the curve y = 2 (1/2 - x)^2 of the unit simplex.
// It is (2,1)-separable but not (n-1, 0)-separable. Requires n >= 4.
DenseMatrix curve_matrix(Index n);

// (m + 3) x (n + 3) matrix [[0, curve(n)], [curve(m)^T, 0]]; (3,3)-separable,
// neither (n+2, 0)- nor (0, m+2)-separable.
DenseMatrix compression_fixture(Index m, Index n);

struct NonUniqueParams {
  Index r1, r2, r3, r4;  // r1 > r3, r2 < r4, r1 + r2 == r3 + r4
  Index m, n;
  bool all_ones = false;  // every block set to ones instead of uniform [0, 1]
};

// Block matrix that is (r1, r2)-separable with the first r1 columns and last
// r2 rows, and also (r3, r4)-separable with the first r3 columns and last r4 rows.
DenseMatrix non_unique_fixture(const NonUniqueParams& params, std::uint64_t seed);

// Writes matrix.csv, clean.csv, wstar.csv, hstar.csv, truth.json and
// permutations.json into `dir` (created if missing).
void save_instance(const std::filesystem::path& dir, const SyntheticInstance& inst);
SyntheticInstance load_instance(const std::filesystem::path& dir);

}  // namespace gsnmf
