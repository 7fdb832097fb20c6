#include "gsnmf/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include <json.hpp>

#include "gsnmf/error.hpp"
#include "gsnmf/io.hpp"
#include "gsnmf/random.hpp"
#include "gsnmf/scaling.hpp"

namespace gsnmf {
namespace {

constexpr int kMaxAttempts = 10;

DenseMatrix uniform_matrix(Rng& rng, Index rows, Index cols) {
  DenseMatrix out(rows, cols);
  for (double& v : out.values()) v = rng.uniform();
  return out;
}

// Each entry zero with probability 1/2, else uniform on [0, 1].
DenseMatrix sparse_uniform_matrix(Rng& rng, Index rows, Index cols) {
  DenseMatrix out(rows, cols);
  for (double& v : out.values()) {
    const bool keep = rng.uniform() < 0.5;
    const double u = rng.uniform();
    v = keep ? u : 0.0;
  }
  return out;
}

Permutation random_permutation(Rng& rng, Index n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), Index{0});
  for (Index i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

// The four blocks of [[W1, W1 H1 + W2 H2], [0, H2]].
struct Blocks {
  DenseMatrix w1;  // (m - r2) x r1
  DenseMatrix h1;  // r1 x (n - r1)
  DenseMatrix w2;  // (m - r2) x r2
  DenseMatrix h2;  // r2 x (n - r1)
};

DenseMatrix assemble(const Blocks& b) {
  const Index top = b.w1.rows();
  const Index r1 = b.w1.cols();
  const Index r2 = b.h2.rows();
  const Index rest = b.h2.cols();
  DenseMatrix m(top + r2, r1 + rest);
  DenseMatrix mix = multiply(b.w1, b.h1);
  add_scaled(mix, 1.0, multiply(b.w2, b.h2));
  for (Index i = 0; i < top; ++i) {
    for (Index j = 0; j < r1; ++j) m(i, j) = b.w1(i, j);
    for (Index j = 0; j < rest; ++j) m(i, r1 + j) = mix(i, j);
  }
  for (Index i = 0; i < r2; ++i)
    for (Index j = 0; j < rest; ++j) m(top + i, r1 + j) = b.h2(i, j);
  return m;
}

struct ScaledModel {
  DenseMatrix scaled;
  DenseMatrix w_star;  // [Ms(:, 0:r1), Dr P2 Dr2^-1], P2 = [W2; I]
  DenseMatrix h_star;  // [Dc1^-1 P1 Dc; Ms(m-r2:, :)], P1 = [I, H1]
};

// Equilibrates the block matrix and carries the planted factors through the
// diagonal scaling. Returns false if the matrix could not be equilibrated.
bool scale_model(const Blocks& b, ScaledModel& out) {
  const DenseMatrix raw = assemble(b);
  ScalingResult sc;
  try {
    sc = sinkhorn_scale(raw);
  } catch (const ScalingError&) {
    return false;
  }
  if (!sc.converged) return false;

  const Index m = raw.rows();
  const Index n = raw.cols();
  const Index r1 = b.w1.cols();
  const Index r2 = b.h2.rows();
  const Index top = m - r2;
  const auto& dr = sc.row_factors;
  const auto& dc = sc.col_factors;

  out.scaled = std::move(sc.scaled);
  out.w_star = DenseMatrix(m, r1 + r2);
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < r1; ++k) out.w_star(i, k) = out.scaled(i, k);
  for (Index k = 0; k < r2; ++k) {
    const double inv = 1.0 / dr[top + k];
    for (Index i = 0; i < top; ++i) out.w_star(i, r1 + k) = dr[i] * b.w2(i, k) * inv;
    out.w_star(top + k, r1 + k) = 1.0;
  }

  out.h_star = DenseMatrix(r1 + r2, n);
  for (Index k = 0; k < r1; ++k) {
    const double inv = 1.0 / dc[k];
    out.h_star(k, k) = 1.0;
    for (Index j = r1; j < n; ++j) out.h_star(k, j) = inv * b.h1(k, j - r1) * dc[j];
  }
  for (Index k = 0; k < r2; ++k) std::ranges::copy(out.scaled.row(top + k), out.h_star.row(r1 + k).begin());
  return true;
}

SyntheticInstance finish_instance(const ScaledModel& model, const DenseMatrix& noise, Index r1, Index r2, double eps,
                                  Rng& rng, std::uint64_t seed) {
  const Index m = model.scaled.rows();
  const Index n = model.scaled.cols();
  SyntheticInstance inst;
  inst.seed = seed;
  inst.noise_level = eps;

  DenseMatrix noisy = model.scaled;
  const double noise_norm = frobenius_norm(noise);
  if (eps > 0.0 && noise_norm > 0.0) {
    const double target = eps * frobenius_norm(model.scaled);
    add_scaled(noisy, target / noise_norm, noise);
    inst.noise_ratio = target / frobenius_norm(model.scaled);
  }
  for (double& v : noisy.values()) v = std::max(0.0, v);

  inst.row_perm = random_permutation(rng, m);
  inst.col_perm = random_permutation(rng, n);
  inst.m = permute_rows_cols(noisy, inst.row_perm, inst.col_perm);
  inst.clean = permute_rows_cols(model.scaled, inst.row_perm, inst.col_perm);
  inst.truth.w_star = select_rows(model.w_star, inst.row_perm);
  inst.truth.h_star = select_cols(model.h_star, inst.col_perm);

  std::vector<Index> cols, rows;
  for (Index j = 0; j < n; ++j)
    if (inst.col_perm[j] < r1) cols.push_back(j);
  for (Index i = 0; i < m; ++i)
    if (inst.row_perm[i] >= m - r2) rows.push_back(i);
  inst.truth.sets = IndexSets(std::move(cols), std::move(rows));
  return inst;
}

}  // namespace

SyntheticInstance gen_fully_random(Index m, Index n, Index r1, Index r2, double eps, std::uint64_t seed) {
  if (r1 > n || r2 > m || r1 + r2 > std::min(m, n)) throw DomainError("gen_fully_random: ranks too large");
  if (r1 + r2 == 0) throw DomainError("gen_fully_random: r1 + r2 must be positive");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("gen_fully_random: eps must be finite and >= 0");

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    Blocks b;
    b.w1 = uniform_matrix(rng, m - r2, r1);
    b.h1 = sparse_uniform_matrix(rng, r1, n - r1);
    b.w2 = sparse_uniform_matrix(rng, m - r2, r2);
    b.h2 = uniform_matrix(rng, r2, n - r1);
    DenseMatrix noise(m, n);
    for (double& v : noise.values()) v = rng.normal();

    ScaledModel model;
    if (!scale_model(b, model)) continue;
    return finish_instance(model, noise, r1, r2, eps, rng, seed);
  }
  throw ScalingError("gen_fully_random: could not draw a scalable instance");
}

SyntheticInstance gen_middle_point(double eps, std::uint64_t seed) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("gen_middle_point: eps must be finite and >= 0");
  constexpr Index m = kMiddlePointRows, n = kMiddlePointCols, r1 = kMiddlePointR1, r2 = kMiddlePointR2;
  constexpr Index top = m - r2;   // 66 = C(12, 2)
  constexpr Index rest = n - r1;  // 45 = C(10, 2)

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    Blocks b;
    b.w1 = uniform_matrix(rng, top, r1);
    b.h1 = DenseMatrix(r1, rest);
    b.w2 = DenseMatrix(top, r2);
    b.h2 = uniform_matrix(rng, r2, rest);
    Index c = 0;
    for (Index a = 0; a < r1; ++a)
      for (Index e = a + 1; e < r1; ++e, ++c) b.h1(a, c) = b.h1(e, c) = 0.5;
    c = 0;
    for (Index a = 0; a < r2; ++a)
      for (Index e = a + 1; e < r2; ++e, ++c) b.w2(c, a) = b.w2(c, e) = 0.5;

    ScaledModel model;
    if (!scale_model(b, model)) continue;

    // Push interior points away from the centroids of the scaled basis
    // columns (first r1 columns) and basis rows (last r2 rows).
    const DenseMatrix& ms = model.scaled;
    std::vector<double> wbar(top, 0.0), hbar(n, 0.0);
    for (Index i = 0; i < top; ++i) {
      for (Index k = 0; k < r1; ++k) wbar[i] += ms(i, k);
      wbar[i] /= static_cast<double>(r1);
    }
    for (Index j = r1; j < n; ++j) {
      for (Index k = 0; k < r2; ++k) hbar[j] += ms(top + k, j);
      hbar[j] /= static_cast<double>(r2);
    }
    DenseMatrix noise(m, n);
    for (Index i = 0; i < top; ++i)
      for (Index j = r1; j < n; ++j) noise(i, j) = ms(i, j) - wbar[i] - hbar[j];

    return finish_instance(model, noise, r1, r2, eps, rng, seed);
  }
  throw ScalingError("gen_middle_point: could not draw a scalable instance");
}

DenseMatrix example1_matrix(double eps) {
  if (!(eps > 0.0)) throw DomainError("example1_matrix: eps must be positive");
  Blocks b;
  b.w1 = DenseMatrix{{1.0, eps}, {1.0, 2.0}, {1.0, 3.0}};
  b.h1 = DenseMatrix{{eps, 2.0 * eps, 3.0 * eps}, {eps, 1.0, 2.0}};
  b.h2 = transpose(b.w1);
  b.w2 = transpose(b.h1);
  return assemble(b);
}

DenseMatrix example1_scaled_reference() {
  return DenseMatrix{{4.654, 0.028, 0.251, 0.034, 0.033},
                     {0.212, 2.551, 0.034, 1.045, 1.157},
                     {0.134, 2.421, 0.033, 1.157, 1.255},
                     {0.0, 0.0, 4.654, 0.212, 0.134},
                     {0.0, 0.0, 0.028, 2.551, 2.421}};
}

DenseMatrix curve_matrix(Index n) {
  if (n < 4) throw DomainError("curve_matrix: n must be at least 4");
  DenseMatrix c(3, n);
  c(0, 0) = 1.0;
  c(1, 1) = 1.0;
  c(0, 2) = 0.5;
  c(2, 2) = 0.5;
  c(1, 3) = 0.5;
  c(2, 3) = 0.5;
  const Index k = n - 4;
  for (Index i = 0; i < k; ++i) {
    const double x = static_cast<double>(i + 1) / (2.0 * static_cast<double>(k + 1));
    const double y = 2.0 * (0.5 - x) * (0.5 - x);
    c(0, 4 + i) = x;
    c(1, 4 + i) = y;
    c(2, 4 + i) = 1.0 - x - y;
  }
  return c;
}

DenseMatrix compression_fixture(Index m, Index n) {
  const DenseMatrix cn = curve_matrix(n);
  const DenseMatrix cm = curve_matrix(m);
  DenseMatrix out(m + 3, n + 3);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < n; ++j) out(i, 3 + j) = cn(i, j);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < 3; ++j) out(3 + i, j) = cm(j, i);
  return out;
}

DenseMatrix non_unique_fixture(const NonUniqueParams& p, std::uint64_t seed) {
  if (!(p.r1 > p.r3 && p.r2 < p.r4 && p.r1 + p.r2 == p.r3 + p.r4)) {
    throw DomainError("non_unique_fixture: need r1 > r3, r2 < r4 and r1 + r2 == r3 + r4");
  }
  if (p.m <= p.r4 || p.n <= p.r1 || p.r3 == 0 || p.r2 == 0) {
    throw DomainError("non_unique_fixture: need m > r4, n > r1, r3 >= 1 and r2 >= 1");
  }
  Rng rng(seed);
  auto block = [&](Index rows, Index cols) {
    return p.all_ones ? DenseMatrix(rows, cols, 1.0) : uniform_matrix(rng, rows, cols);
  };
  const Index top = p.m - p.r4;
  const Index mid = p.r4 - p.r2;
  const Index gap = p.r1 - p.r3;
  const Index rest = p.n - p.r1;
  const DenseMatrix m11 = block(top, p.r3);
  const DenseMatrix m22 = block(mid, gap);
  const DenseMatrix m33 = block(p.r2, rest);
  const DenseMatrix x1 = block(p.r3, rest);
  const DenseMatrix y1 = block(top, p.r2);
  const DenseMatrix x2 = block(gap, rest);
  const DenseMatrix y2 = block(mid, p.r2);
  const DenseMatrix m13 = multiply(m11, x1) + multiply(y1, m33);
  const DenseMatrix m23 = multiply(m22, x2) + multiply(y2, m33);

  DenseMatrix out(p.m, p.n);
  for (Index i = 0; i < top; ++i) {
    for (Index j = 0; j < p.r3; ++j) out(i, j) = m11(i, j);
    for (Index j = 0; j < rest; ++j) out(i, p.r1 + j) = m13(i, j);
  }
  for (Index i = 0; i < mid; ++i) {
    for (Index j = 0; j < gap; ++j) out(top + i, p.r3 + j) = m22(i, j);
    for (Index j = 0; j < rest; ++j) out(top + i, p.r1 + j) = m23(i, j);
  }
  for (Index i = 0; i < p.r2; ++i)
    for (Index j = 0; j < rest; ++j) out(top + mid + i, p.r1 + j) = m33(i, j);
  return out;
}

namespace {

std::vector<Index> one_based(const std::vector<Index>& v) {
  std::vector<Index> out(v);
  for (Index& x : out) ++x;
  return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace

void save_instance(const std::filesystem::path& dir, const SyntheticInstance& inst) {
  std::filesystem::create_directories(dir);
  io::write_matrix(dir / "matrix.csv", inst.m);
  io::write_matrix(dir / "clean.csv", inst.clean);
  io::write_matrix(dir / "wstar.csv", inst.truth.w_star);
  io::write_matrix(dir / "hstar.csv", inst.truth.h_star);
  nlohmann::json truth = {
      {"rows", inst.m.rows()},
      {"cols", inst.m.cols()},
      {"k1", inst.truth.sets.cols},
      {"k2", inst.truth.sets.rows},
      {"k1_one_based", one_based(inst.truth.sets.cols)},
      {"k2_one_based", one_based(inst.truth.sets.rows)},
      {"seed", inst.seed},
      {"epsilon", inst.noise_level},
      {"noise_ratio", inst.noise_ratio},
  };
  write_json(dir / "truth.json", truth);
  write_json(dir / "permutations.json", {{"row_perm", inst.row_perm}, {"col_perm", inst.col_perm}});
}

SyntheticInstance load_instance(const std::filesystem::path& dir) {
  SyntheticInstance inst;
  inst.m = io::read_matrix(dir / "matrix.csv");
  inst.clean = io::read_matrix(dir / "clean.csv");
  inst.truth.w_star = io::read_matrix(dir / "wstar.csv");
  inst.truth.h_star = io::read_matrix(dir / "hstar.csv");
  const auto truth = read_json(dir / "truth.json");
  const auto perms = read_json(dir / "permutations.json");
  try {
    inst.truth.sets = IndexSets(truth.at("k1").get<std::vector<Index>>(), truth.at("k2").get<std::vector<Index>>());
    inst.seed = truth.at("seed").get<std::uint64_t>();
    inst.noise_level = truth.at("epsilon").get<double>();
    inst.noise_ratio = truth.at("noise_ratio").get<double>();
    inst.row_perm = perms.at("row_perm").get<Permutation>();
    inst.col_perm = perms.at("col_perm").get<Permutation>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(dir.string() + ": malformed instance metadata: " + e.what());
  }
  inst.truth.sets.validate(inst.m.rows(), inst.m.cols());
  return inst;
}

}  // namespace gsnmf
