#include <doctest.h>

#include <cmath>
#include <filesystem>

#include <unistd.h>

#include "gsnmf/assignment.hpp"
#include "gsnmf/bench.hpp"
#include "gsnmf/datagen.hpp"
#include "gsnmf/error.hpp"
#include "oracles.hpp"

using namespace gsnmf;

namespace {

// [[W1, W1 H1 + W2 H2], [0, H2]] with positive random blocks.
DenseMatrix planted_gs(Index m, Index n, Index r1, Index r2, std::uint64_t seed) {
  const DenseMatrix w1 = oracle::random_matrix(m - r2, r1, seed);
  const DenseMatrix h1 = oracle::random_matrix(r1, n - r1, seed + 1);
  const DenseMatrix w2 = oracle::random_matrix(m - r2, r2, seed + 2);
  const DenseMatrix h2 = oracle::random_matrix(r2, n - r1, seed + 3);
  const DenseMatrix top = multiply(w1, h1) + multiply(w2, h2);
  DenseMatrix out(m, n);
  for (Index i = 0; i < m - r2; ++i) {
    for (Index j = 0; j < r1; ++j) out(i, j) = w1(i, j);
    for (Index j = 0; j < n - r1; ++j) out(i, r1 + j) = top(i, j);
  }
  for (Index i = 0; i < r2; ++i)
    for (Index j = 0; j < n - r1; ++j) out(m - r2 + i, r1 + j) = h2(i, j);
  return out;
}

IndexSets planted_sets(Index m, Index r1, Index r2) {
  std::vector<Index> c, r;
  for (Index j = 0; j < r1; ++j) c.push_back(j);
  for (Index i = m - r2; i < m; ++i) r.push_back(i);
  return {c, r};
}

}  // namespace

TEST_CASE("index sets") {
  const IndexSets s({3, 1}, {2});
  CHECK(s.cols == std::vector<Index>{1, 3});
  CHECK(s.total() == 3);
  CHECK_THROWS_AS(IndexSets({1, 1}, {}), ShapeError);
  CHECK_THROWS_AS(s.validate(2, 5), ShapeError);  // row 2 out of range
  CHECK_THROWS_AS(IndexSets({}, {}).validate(3, 3), ShapeError);
  CHECK_NOTHROW(s.validate(3, 4));
}

TEST_CASE("fit_weights on an exact GS matrix returns the identity blocks") {
  const Index m = 9, n = 8, r1 = 3, r2 = 2;
  const DenseMatrix mat = planted_gs(m, n, r1, r2, 7);
  const IndexSets sets = planted_sets(m, r1, r2);
  const GsDecomposition dec = fit_weights(mat, sets);
  CHECK(dec.relative_error <= 1e-8);
  for (Index k = 0; k < r1; ++k)
    for (Index j = 0; j < r1; ++j) CHECK(std::abs(dec.p1(k, j) - (k == j ? 1.0 : 0.0)) <= 1e-6);
  for (Index i = 0; i < r2; ++i)
    for (Index k = 0; k < r2; ++k) CHECK(std::abs(dec.p2(m - r2 + i, k) - (i == k ? 1.0 : 0.0)) <= 1e-6);
  CHECK(is_nonnegative(dec.p1));
  CHECK(is_nonnegative(dec.p2));
  CHECK(std::abs(relative_error(mat, dec) - dec.relative_error) <= 1e-10);
}

TEST_CASE("fit_weights matches a long projected-gradient run") {
  const DenseMatrix mat = oracle::random_matrix(6, 6, 99);
  const IndexSets sets({0}, {5});
  const GsDecomposition dec = fit_weights(mat, sets);
  const double ours = 0.5 * dec.relative_error * dec.relative_error * frobenius_norm_squared(mat);
  const double pg = oracle::gs_fit_objective_pg(mat, sets, 100000);
  CHECK(std::abs(ours - pg) <= 1e-6);
}

TEST_CASE("fit_weights on Example 1 at K1 = {1,2,3}, K2 = {5}") {
  // The exact NNLS optimum (independent active-set solver) is about 6.76e-5;
  // block coordinate descent gets within 0.2% of it.
  const DenseMatrix m = example1_matrix(0.001);
  const IndexSets sets({0, 1, 2}, {4});
  const double exact = oracle::gs_fit_relative_error(m, sets);
  const GsDecomposition dec = fit_weights(m, sets);
  CHECK(dec.relative_error >= exact * (1 - 1e-9));
  CHECK(dec.relative_error <= exact * 1.002);
}

TEST_CASE("fit_weights objective never increases and handles degenerate bases") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DenseMatrix mat = oracle::random_matrix(10, 8, seed);
    const GsDecomposition dec = fit_weights(mat, IndexSets({1, 4}, {0, 7}));
    for (std::size_t k = 1; k < dec.objective_history.size(); ++k)
      CHECK(dec.objective_history[k] <= dec.objective_history[k - 1] * (1 + 1e-12));
    CHECK(dec.relative_error <= 1.0);
  }
  DenseMatrix z = oracle::random_matrix(4, 4, 3);
  for (Index i = 0; i < 4; ++i) z(i, 2) = 0.0;  // zero basis column
  const GsDecomposition dec = fit_weights(z, IndexSets({2}, {0}));
  for (Index j = 0; j < 4; ++j) CHECK(dec.p1(0, j) == 0.0);
  CHECK(std::isfinite(dec.relative_error));
}

TEST_CASE("relative error edge cases") {
  const DenseMatrix m = oracle::random_matrix(4, 5, 1);
  GsDecomposition zero;
  zero.sets = IndexSets({0}, {1});
  zero.p1 = DenseMatrix(1, 5);
  zero.p2 = DenseMatrix(4, 1);
  CHECK(relative_error(m, zero) == doctest::Approx(1.0));
  CHECK_THROWS_AS(relative_error(DenseMatrix(4, 5), zero), DomainError);
}

TEST_CASE("accuracy") {
  const IndexSets truth({0, 1}, {3, 4});
  CHECK(accuracy(truth, truth) == 1.0);
  CHECK(accuracy(IndexSets({2}, {0}), truth) == 0.0);
  CHECK(accuracy(IndexSets({0, 1, 2}, {4}), truth) == 0.75);
  CHECK_THROWS_AS(accuracy(truth, IndexSets()), DomainError);
}

TEST_CASE("assemble_factors") {
  const DenseMatrix m = example1_matrix(0.001);
  SUBCASE("columns only") {
    const GsDecomposition dec = fit_weights(m, IndexSets({0, 3}, {}));
    const Factors f = assemble_factors(m, dec);
    CHECK(f.w == select_cols(m, std::vector<Index>{0, 3}));
    CHECK(f.h == dec.p1);
  }
  SUBCASE("rows only") {
    const GsDecomposition dec = fit_weights(m, IndexSets({}, {1, 2}));
    const Factors f = assemble_factors(m, dec);
    CHECK(f.w == dec.p2);
    CHECK(f.h == select_rows(m, std::vector<Index>{1, 2}));
  }
  SUBCASE("true sets reconstruct Example 1") {
    const GsDecomposition dec = fit_weights(m, IndexSets({0, 1}, {3, 4}));
    const Factors f = assemble_factors(m, dec);
    CHECK(frobenius_norm(m - multiply(f.w, f.h)) / frobenius_norm(m) <= 1e-6);
  }
}

TEST_CASE("assignment solver matches brute force") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const DenseMatrix cost = oracle::random_matrix(5, 5, seed);
    const auto a = solve_assignment(cost);
    double ours = 0.0;
    for (Index i = 0; i < 5; ++i) ours += cost(i, a[i]);
    std::vector<Index> p{0, 1, 2, 3, 4};
    double best = 1e300;
    do {
      double s = 0.0;
      for (Index i = 0; i < 5; ++i) s += cost(i, p[i]);
      best = std::min(best, s);
    } while (std::next_permutation(p.begin(), p.end()));
    CHECK(ours == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("distance to ground truth") {
  GroundTruth truth;
  truth.w_star = oracle::random_matrix(6, 3, 1);
  truth.h_star = oracle::random_matrix(3, 5, 2);
  CHECK(distance_to_ground_truth(truth.w_star, truth.h_star, truth) <= 1e-12);

  const Permutation p{2, 0, 1};
  const DenseMatrix wp = select_cols(truth.w_star, p), hp = select_rows(truth.h_star, p);
  CHECK(distance_to_ground_truth(wp, hp, truth) <= 1e-12);
  CHECK(distance_to_ground_truth(2.0 * truth.w_star, truth.h_star, truth) == doctest::Approx(0.5).epsilon(1e-14));

  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const DenseMatrix w = oracle::random_matrix(6, 3, seed), h = oracle::random_matrix(3, 5, seed + 100);
    const double brute =
        oracle::min_over_permutations_cols(truth.w_star, w) / (2 * frobenius_norm(truth.w_star)) +
        oracle::min_over_permutations_cols(transpose(truth.h_star), transpose(h)) / (2 * frobenius_norm(truth.h_star));
    CHECK(distance_to_ground_truth(w, h, truth) == doctest::Approx(brute).epsilon(1e-12));
  }
  CHECK_THROWS_AS(distance_to_ground_truth(oracle::random_matrix(6, 2, 1), oracle::random_matrix(2, 5, 1), truth),
                  ShapeError);
}

TEST_CASE("A-HALS NMF") {
  SUBCASE("rank one") {
    DenseMatrix m(5, 4);
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 4; ++j) m(i, j) = (i + 1.0) * (0.5 + j);
    const NmfResult r = nmf_ahals(m, 1, 200, 1);
    CHECK(frobenius_norm(m - multiply(r.w, r.h)) / frobenius_norm(m) <= 1e-6);
  }
  SUBCASE("identity, full rank") {
    const DenseMatrix m = DenseMatrix::identity(4);
    const NmfResult r = nmf_ahals(m, 4, 1000, 3);
    CHECK(frobenius_norm(m - multiply(r.w, r.h)) / frobenius_norm(m) <= 1e-3);
  }
  SUBCASE("residual history is nonincreasing and runs are deterministic") {
    const DenseMatrix m = oracle::random_matrix(10, 8, 42);
    const NmfResult a = nmf_ahals(m, 3, 100, 9);
    for (std::size_t k = 1; k < a.residual_history.size(); ++k)
      CHECK(a.residual_history[k] <= a.residual_history[k - 1] + 1e-12);
    const NmfResult b = nmf_ahals(m, 3, 100, 9);
    CHECK(a.w == b.w);
    CHECK(a.h == b.h);
    CHECK(is_nonnegative(a.w));
    CHECK(is_nonnegative(a.h));
  }
  CHECK_THROWS(nmf_ahals(DenseMatrix::identity(3), 4, 10, 1));
}

TEST_CASE("decomposition JSON round trip") {
  const DenseMatrix m = example1_matrix(0.001);
  const auto dir = std::filesystem::temp_directory_path() / ("gsnmf_dec_test_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  for (const IndexSets& sets : {IndexSets({0, 1}, {3, 4}), IndexSets({0, 2}, {}), IndexSets({}, {1})}) {
    const GsDecomposition dec = fit_weights(m, sets);
    save_decomposition(dir / "dec.json", dec);
    const GsDecomposition back = load_decomposition(dir / "dec.json");
    CHECK(back.sets == dec.sets);
    CHECK(back.p1 == dec.p1);
    CHECK(back.p2 == dec.p2);
    CHECK(back.relative_error == dec.relative_error);
  }
  std::filesystem::remove_all(dir);
}
