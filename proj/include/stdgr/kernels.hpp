#pragma once

// Data-parallel inner loops used by the tensor and solver code.
//
// Every kernel has a scalar reference implementation; AVX2 (x86-64) and NEON
// (aarch64) variants are selected once at startup. All matrices are
// column-major with an explicit leading dimension.

#include <cstddef>
#include <string_view>

namespace stdgr::kernels {

enum class Isa { scalar, avx2, neon };
enum class Trans { no, yes };

struct KernelTable {
  Isa isa;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // sum_i x[i]^2
  double (*sum_squares)(const double* x, std::size_t n);
  // out[i] = sign(in[i]) * min(max(|in[i]| - tau, 0), c)
  void (*prox_soft_box)(const double* in, double* out, std::size_t n, double tau, double c);
  // C = alpha * op(A) * op(B) + beta * C, C is m x n, op(A) is m x k.
  void (*gemm)(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha,
               const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
               double* c, std::size_t ldc);
};

const KernelTable& scalar_table();
bool available(Isa isa);
const KernelTable& table(Isa isa);

// Chosen on first use: the widest available ISA unless the STDGR_KERNELS
// environment variable names another one ("scalar", "avx2", "neon").
const KernelTable& active();
std::string_view name(Isa isa);

}  // namespace stdgr::kernels
