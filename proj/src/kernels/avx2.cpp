#include <immintrin.h>

#include <cmath>

#include "gemm_impl.hpp"
#include "stdgr/kernels.hpp"

namespace stdgr::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double sum_squares_avx2(const double* x, std::size_t n) { return dot_avx2(x, x, n); }

void prox_soft_box_avx2(const double* in, double* out, std::size_t n, double tau, double c) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d vtau = _mm256_set1_pd(tau);
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(in + i);
    const __m256d sign = _mm256_and_pd(v, sign_mask);
    const __m256d mag = _mm256_andnot_pd(sign_mask, v);
    // |v| > c + tau implies |v| - tau > c, so the clip branch is a min.
    const __m256d r = _mm256_min_pd(_mm256_max_pd(_mm256_sub_pd(mag, vtau), zero), vc);
    _mm256_storeu_pd(out + i, _mm256_or_pd(r, sign));
  }
  for (; i < n; ++i) {
    const double r = std::fmin(std::fmax(std::fabs(in[i]) - tau, 0.0), c);
    out[i] = std::copysign(r, in[i]);
  }
}

void gemm_avx2(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha,
               const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
               double* c, std::size_t ldc) {
  detail::gemm_loops(dot_avx2, axpy_avx2, ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{Isa::avx2,         dot_avx2,  axpy_avx2, sum_squares_avx2,
                             prox_soft_box_avx2, gemm_avx2};
  return t;
}

}  // namespace stdgr::kernels
