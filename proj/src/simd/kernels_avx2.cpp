// Compiled with -mavx2. Only reached through avx2_kernels(), which checks the CPU first.
// Multiplies and adds stay separate (no FMA) so every element rounds exactly as in the
// scalar table.

#include <immintrin.h>

#include "pga/simd/kernels.hpp"

namespace pga::simd::detail {

namespace {

inline double column_dot(std::size_t k, const double* arow, const double* b, std::size_t n, std::size_t j) {
  double s = 0.0;
  for (std::size_t p = 0; p < k; ++p) s = s + arow[p] * b[p * n + j];
  return s;
}

void gemm_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* a0 = a + (i + 0) * k;
    const double* a1 = a + (i + 1) * k;
    const double* a2 = a + (i + 2) * k;
    const double* a3 = a + (i + 3) * k;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
      __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
      __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
      __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d b0 = _mm256_loadu_pd(b + p * n + j);
        const __m256d b1 = _mm256_loadu_pd(b + p * n + j + 4);
        __m256d av = _mm256_broadcast_sd(a0 + p);
        c00 = _mm256_add_pd(c00, _mm256_mul_pd(av, b0));
        c01 = _mm256_add_pd(c01, _mm256_mul_pd(av, b1));
        av = _mm256_broadcast_sd(a1 + p);
        c10 = _mm256_add_pd(c10, _mm256_mul_pd(av, b0));
        c11 = _mm256_add_pd(c11, _mm256_mul_pd(av, b1));
        av = _mm256_broadcast_sd(a2 + p);
        c20 = _mm256_add_pd(c20, _mm256_mul_pd(av, b0));
        c21 = _mm256_add_pd(c21, _mm256_mul_pd(av, b1));
        av = _mm256_broadcast_sd(a3 + p);
        c30 = _mm256_add_pd(c30, _mm256_mul_pd(av, b0));
        c31 = _mm256_add_pd(c31, _mm256_mul_pd(av, b1));
      }
      _mm256_storeu_pd(c + (i + 0) * n + j, c00);
      _mm256_storeu_pd(c + (i + 0) * n + j + 4, c01);
      _mm256_storeu_pd(c + (i + 1) * n + j, c10);
      _mm256_storeu_pd(c + (i + 1) * n + j + 4, c11);
      _mm256_storeu_pd(c + (i + 2) * n + j, c20);
      _mm256_storeu_pd(c + (i + 2) * n + j + 4, c21);
      _mm256_storeu_pd(c + (i + 3) * n + j, c30);
      _mm256_storeu_pd(c + (i + 3) * n + j + 4, c31);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d c0 = _mm256_setzero_pd(), c1 = _mm256_setzero_pd();
      __m256d c2 = _mm256_setzero_pd(), c3 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d bv = _mm256_loadu_pd(b + p * n + j);
        c0 = _mm256_add_pd(c0, _mm256_mul_pd(_mm256_broadcast_sd(a0 + p), bv));
        c1 = _mm256_add_pd(c1, _mm256_mul_pd(_mm256_broadcast_sd(a1 + p), bv));
        c2 = _mm256_add_pd(c2, _mm256_mul_pd(_mm256_broadcast_sd(a2 + p), bv));
        c3 = _mm256_add_pd(c3, _mm256_mul_pd(_mm256_broadcast_sd(a3 + p), bv));
      }
      _mm256_storeu_pd(c + (i + 0) * n + j, c0);
      _mm256_storeu_pd(c + (i + 1) * n + j, c1);
      _mm256_storeu_pd(c + (i + 2) * n + j, c2);
      _mm256_storeu_pd(c + (i + 3) * n + j, c3);
    }
    for (; j < n; ++j) {
      c[(i + 0) * n + j] = column_dot(k, a0, b, n, j);
      c[(i + 1) * n + j] = column_dot(k, a1, b, n, j);
      c[(i + 2) * n + j] = column_dot(k, a2, b, n, j);
      c[(i + 3) * n + j] = column_dot(k, a3, b, n, j);
    }
  }
  for (; i < m; ++i) {
    const double* arow = a + i * k;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_broadcast_sd(arow + p), _mm256_loadu_pd(b + p * n + j)));
      }
      _mm256_storeu_pd(c + i * n + j, acc);
    }
    for (; j < n; ++j) c[i * n + j] = column_dot(k, arow, b, n, j);
  }
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yv = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(av, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

double dot_avx2(std::size_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s = s + x[i] * y[i];
  return s;
}

void relu_avx2(std::size_t n, const double* x, double* y) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    // keep v where v > 0, else +0.0 (matches the scalar select, including for -0.0 and NaN)
    const __m256d keep = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(y + i, _mm256_and_pd(keep, v));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

constexpr KernelTable kAvx2{"avx2", gemm_avx2, axpy_avx2, dot_avx2, relu_avx2};

}  // namespace

const KernelTable& avx2_table() { return kAvx2; }

}  // namespace pga::simd::detail
