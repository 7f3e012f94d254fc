#include <arm_neon.h>

#include <cmath>

#include "gemm_impl.hpp"
#include "stdgr/kernels.hpp"

namespace stdgr::kernels {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double sum_squares_neon(const double* x, std::size_t n) { return dot_neon(x, x, n); }

void prox_soft_box_neon(const double* in, double* out, std::size_t n, double tau, double c) {
  const float64x2_t vtau = vdupq_n_f64(tau);
  const float64x2_t vc = vdupq_n_f64(c);
  const float64x2_t zero = vdupq_n_f64(0.0);
  const uint64x2_t sign_mask = vdupq_n_u64(0x8000000000000000ULL);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(in + i);
    const float64x2_t r = vminq_f64(vmaxq_f64(vsubq_f64(vabsq_f64(v), vtau), zero), vc);
    const uint64x2_t sign = vandq_u64(vreinterpretq_u64_f64(v), sign_mask);
    vst1q_f64(out + i, vreinterpretq_f64_u64(vorrq_u64(vreinterpretq_u64_f64(r), sign)));
  }
  for (; i < n; ++i) {
    const double r = std::fmin(std::fmax(std::fabs(in[i]) - tau, 0.0), c);
    out[i] = std::copysign(r, in[i]);
  }
}

void gemm_neon(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha,
               const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
               double* c, std::size_t ldc) {
  detail::gemm_loops(dot_neon, axpy_neon, ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable t{Isa::neon,         dot_neon,  axpy_neon, sum_squares_neon,
                             prox_soft_box_neon, gemm_neon};
  return t;
}

}  // namespace stdgr::kernels
