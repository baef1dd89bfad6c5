#pragma once

#include <cstddef>
#include <string_view>

// Inner-loop kernels behind the tensor core. Every table exposes the same
// entry points; the active one is picked once at startup from the CPU's
// capabilities.
//
// gemm, axpy and relu are elementwise-ordered: each output element sees the
// same sequence of roundings in every table, so results are bitwise equal
// across tables. dot reduces in lanes and only agrees to rounding.

namespace pga::simd {

struct KernelTable {
  const char* name;
  // c[m x n] = a[m x k] * b[k x n], each c[i][j] accumulated over p = 0..k-1 in order.
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
  // y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  double (*dot)(std::size_t n, const double* x, const double* y);
  // y = max(0, x); x and y may alias
  void (*relu)(std::size_t n, const double* x, double* y);
};

const KernelTable& scalar_kernels();

/// nullptr when the build has no AVX2 table or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

/// Table used by the tensor core. Honors PGA_SIMD=scalar in the environment.
const KernelTable& active_kernels();

std::string_view active_kernel_name();

}  // namespace pga::simd
