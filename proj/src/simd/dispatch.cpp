#include <cstdlib>
#include <string_view>

#include "pga/simd/kernels.hpp"

namespace pga::simd {

#if defined(PGA_HAVE_AVX2)
namespace detail {
const KernelTable& avx2_table();
}
#endif

const KernelTable* avx2_kernels() {
#if defined(PGA_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("PGA_SIMD"); env && std::string_view(env) == "scalar") {
    return scalar_kernels();
  }
  if (const KernelTable* t = avx2_kernels()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& table = select();
  return table;
}

std::string_view active_kernel_name() { return active_kernels().name; }

}  // namespace pga::simd
