#pragma once

// Shared loop nest for the gemm kernels. Each ISA instantiates it with its own
// dot/axpy primitives, so the blocking and traversal order are identical.

#include <cstddef>
#include <vector>

#include "stdgr/kernels.hpp"

namespace stdgr::kernels::detail {

template <typename Dot, typename Axpy>
void gemm_loops(Dot dot, Axpy axpy, Trans ta, Trans tb, std::size_t m, std::size_t n,
                std::size_t k, double alpha, const double* a, std::size_t lda, const double* b,
                std::size_t ldb, double beta, double* c, std::size_t ldc) {
  for (std::size_t j = 0; j < n; ++j) {
    double* cj = c + j * ldc;
    if (beta == 0.0) {
      for (std::size_t i = 0; i < m; ++i) cj[i] = 0.0;
    } else if (beta != 1.0) {
      for (std::size_t i = 0; i < m; ++i) cj[i] *= beta;
    }
  }
  if (m == 0 || n == 0 || k == 0 || alpha == 0.0) return;

  if (ta == Trans::no) {
    // Column updates: C(:, j) += alpha * A(:, l) * op(B)(l, j).
    for (std::size_t j = 0; j < n; ++j) {
      double* cj = c + j * ldc;
      for (std::size_t l = 0; l < k; ++l) {
        const double blj = (tb == Trans::no) ? b[l + j * ldb] : b[j + l * ldb];
        if (blj != 0.0) axpy(alpha * blj, a + l * lda, cj, m);
      }
    }
    return;
  }

  // op(A) = A^T: C(i, j) += alpha * <A(:, i), op(B)(:, j)>.
  if (tb == Trans::no) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        c[i + j * ldc] += alpha * dot(a + i * lda, b + j * ldb, k);
      }
    }
    return;
  }
  std::vector<double> column(k);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < k; ++l) column[l] = b[j + l * ldb];
    for (std::size_t i = 0; i < m; ++i) {
      c[i + j * ldc] += alpha * dot(a + i * lda, column.data(), k);
    }
  }
}

}  // namespace stdgr::kernels::detail
