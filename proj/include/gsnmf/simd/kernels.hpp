#pragma once
// Vector kernels used by every dense inner loop in the library.
//
// Each kernel has a portable scalar reference and, where the CPU allows it,
// an AVX2+FMA variant. The active table is chosen once at first use from the
// CPU feature flags; GSNMF_SIMD=scalar|avx2 in the environment overrides it.

#include <cstddef>
#include <span>
#include <string_view>

namespace gsnmf::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // sum_i x[i]^2
  double (*sum_squares)(const double* x, std::size_t n);
  // acc[i] += x[i]^2
  void (*add_squares)(const double* x, double* acc, std::size_t n);
  // x[i] *= a
  void (*scale)(double a, double* x, std::size_t n);
};

bool isa_supported(Isa isa) noexcept;
std::string_view isa_name(Isa isa) noexcept;

// Throws std::runtime_error when the ISA is not available on this CPU.
const KernelTable& kernels_for(Isa isa);

const KernelTable& active_kernels();
Isa active_isa();

namespace detail {
const KernelTable& scalar_table() noexcept;
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table() noexcept;
#endif
}  // namespace detail

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active_kernels().dot(x.data(), y.data(), x.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active_kernels().axpy(a, x.data(), y.data(), x.size());
}

inline double sum_squares(std::span<const double> x) {
  return active_kernels().sum_squares(x.data(), x.size());
}

inline void add_squares(std::span<const double> x, std::span<double> acc) {
  active_kernels().add_squares(x.data(), acc.data(), x.size());
}

inline void scale(double a, std::span<double> x) {
  active_kernels().scale(a, x.data(), x.size());
}

}  // namespace gsnmf::simd
