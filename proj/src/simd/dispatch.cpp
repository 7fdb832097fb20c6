#include <cstdlib>
#include <stdexcept>
#include <string>

#include "gsnmf/simd/kernels.hpp"

namespace gsnmf::simd {

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::runtime_error("SIMD kernels not supported on this CPU: " + std::string(isa_name(isa)));
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

namespace {

const KernelTable& select_kernels() {
  if (const char* env = std::getenv("GSNMF_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return kernels_for(Isa::scalar);
    if (want == "avx2") return kernels_for(Isa::avx2);
    throw std::runtime_error("GSNMF_SIMD must be 'scalar' or 'avx2', got '" + want + "'");
  }
  if (isa_supported(Isa::avx2)) return kernels_for(Isa::avx2);
  return kernels_for(Isa::scalar);
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& table = select_kernels();
  return table;
}

Isa active_isa() { return active_kernels().isa; }

}  // namespace gsnmf::simd
