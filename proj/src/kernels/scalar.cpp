#include <algorithm>
#include <cmath>

#include "gemm_impl.hpp"
#include "stdgr/kernels.hpp"

namespace stdgr::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double sum_squares_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

// Literal two-branch form of the box-constrained soft threshold.
void prox_soft_box_scalar(const double* in, double* out, std::size_t n, double tau, double c) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = in[i];
    const double mag = std::fabs(v);
    double r;
    if (mag <= c + tau) {
      r = std::max(mag - tau, 0.0);
    } else {
      r = c;
    }
    out[i] = (v < 0.0) ? -r : (v > 0.0 ? r : 0.0);
  }
}

void gemm_scalar(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha,
                 const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
                 double* c, std::size_t ldc) {
  detail::gemm_loops(dot_scalar, axpy_scalar, ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c,
                     ldc);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{Isa::scalar,         dot_scalar,  axpy_scalar, sum_squares_scalar,
                             prox_soft_box_scalar, gemm_scalar};
  return t;
}

}  // namespace stdgr::kernels
