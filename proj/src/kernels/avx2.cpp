// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma on
// x86-64 only; elsewhere it contributes a null table.

#include <cmath>
#include <limits>

#include "declsolve/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace declsolve::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d vabs(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(_mm256_loadu_pd(a + i), acc0);
    acc1 = _mm256_add_pd(_mm256_loadu_pd(a + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(_mm256_loadu_pd(a + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i];
  return s;
}

double asum_avx2(const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(vabs(_mm256_loadu_pd(a + i)), acc0);
    acc1 = _mm256_add_pd(vabs(_mm256_loadu_pd(a + i + 4)), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(vabs(_mm256_loadu_pd(a + i)), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += std::fabs(a[i]);
  return s;
}

double sumsq_avx2(const double* a, std::size_t n) { return dot_avx2(a, a, n); }

double amax_avx2(const double* a, std::size_t n) {
  __m256d m = _mm256_setzero_pd();
  __m256d nan_mask = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(a + i);
    nan_mask = _mm256_or_pd(nan_mask, _mm256_cmp_pd(v, v, _CMP_UNORD_Q));
    m = _mm256_max_pd(m, vabs(v));
  }
  if (_mm256_movemask_pd(nan_mask) != 0) return std::numeric_limits<double>::quiet_NaN();
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double out = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
  for (; i < n; ++i) {
    if (std::isnan(a[i])) return a[i];
    out = std::fmax(out, std::fabs(a[i]));
  }
  return out;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(double alpha, const double* x, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

#define DECLSOLVE_BINARY_AVX2(NAME, INTRIN, OP)                                   \
  void NAME(const double* a, const double* b, double* out, std::size_t n) {       \
    std::size_t i = 0;                                                            \
    for (; i + 4 <= n; i += 4) {                                                  \
      _mm256_storeu_pd(out + i, INTRIN(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))); \
    }                                                                             \
    for (; i < n; ++i) out[i] = a[i] OP b[i];                                     \
  }

DECLSOLVE_BINARY_AVX2(add_avx2, _mm256_add_pd, +)
DECLSOLVE_BINARY_AVX2(sub_avx2, _mm256_sub_pd, -)
DECLSOLVE_BINARY_AVX2(mul_avx2, _mm256_mul_pd, *)
DECLSOLVE_BINARY_AVX2(div_avx2, _mm256_div_pd, /)

#undef DECLSOLVE_BINARY_AVX2

}  // namespace

const Table* avx2_table() {
  static const Table table{
      "avx2",     dot_avx2, sum_avx2, asum_avx2, sumsq_avx2, amax_avx2, axpy_avx2,
      scale_avx2, add_avx2, sub_avx2, mul_avx2,  div_avx2,
  };
  return &table;
}

}  // namespace declsolve::kernels

#else

namespace declsolve::kernels {
const Table* avx2_table() { return nullptr; }
}  // namespace declsolve::kernels

#endif
