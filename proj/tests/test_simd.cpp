#include <doctest.h>

#include <cmath>
#include <vector>

#include "gsnmf/random.hpp"
#include "gsnmf/simd/kernels.hpp"

using namespace gsnmf;
using simd::Isa;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform() * 2.0 - 1.0;
  return v;
}

}  // namespace

TEST_CASE("scalar kernels compute the textbook formulas") {
  const auto& k = simd::kernels_for(Isa::scalar);
  const std::vector<double> x{1, 2, 3}, y{4, 5, 6};
  CHECK(k.dot(x.data(), y.data(), 3) == 32.0);
  CHECK(k.sum_squares(x.data(), 3) == 14.0);
  std::vector<double> z = y;
  k.axpy(2.0, x.data(), z.data(), 3);
  CHECK(z == std::vector<double>{6, 9, 12});
  std::vector<double> acc{1, 1, 1};
  k.add_squares(x.data(), acc.data(), 3);
  CHECK(acc == std::vector<double>{2, 5, 10});
  k.scale(0.5, z.data(), 3);
  CHECK(z == std::vector<double>{3, 4.5, 6});
}

TEST_CASE("avx2 kernels match the scalar reference") {
  if (!simd::isa_supported(Isa::avx2)) {
    MESSAGE("AVX2 not available on this CPU; skipping");
    return;
  }
  const auto& s = simd::kernels_for(Isa::scalar);
  const auto& v = simd::kernels_for(Isa::avx2);
  // lengths straddle the vector width and the unrolled tail
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 100u, 1001u}) {
    CAPTURE(n);
    const auto x = random_vec(n, 100 + n), y = random_vec(n, 200 + n);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * y[i]);
    CHECK(std::abs(s.dot(x.data(), y.data(), n) - v.dot(x.data(), y.data(), n)) <= 1e-14 * (mag + 1));
    CHECK(std::abs(s.sum_squares(x.data(), n) - v.sum_squares(x.data(), n)) <= 1e-14 * (n + 1));

    std::vector<double> ys = y, yv = y;
    s.axpy(0.37, x.data(), ys.data(), n);
    v.axpy(0.37, x.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ys[i] - yv[i]) <= 1e-15);

    std::vector<double> as(n, 0.5), av(n, 0.5);
    s.add_squares(x.data(), as.data(), n);
    v.add_squares(x.data(), av.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(as[i] - av[i]) <= 1e-15);

    std::vector<double> cs = x, cv = x;
    s.scale(-1.7, cs.data(), n);
    v.scale(-1.7, cv.data(), n);
    CHECK(cs == cv);
  }
}

TEST_CASE("dispatch reports a supported isa") {
  CHECK(simd::isa_supported(simd::active_isa()));
  CHECK(simd::isa_supported(Isa::scalar));
  CHECK(simd::isa_name(Isa::scalar) == "scalar");
  CHECK(simd::active_kernels().isa == simd::active_isa());
}
