#include "stdgr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stdgr/error.hpp"
#include "stdgr/kernels.hpp"

namespace stdgr {
namespace {

void check_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw UsageError("mode index must be 1, 2 or 3 (got " + std::to_string(mode) + ")");
  }
}

std::string dims_string(const Dims& d) {
  return "(" + std::to_string(d.n1) + "," + std::to_string(d.n2) + "," + std::to_string(d.n3) + ")";
}

// Column of element (i1, i2, i3) in the mode-k unfolding, all zero-based:
// j = sum_{m != k} i_m * L_m with L_m = prod_{s < m, s != k} n_s.
Index unfold_column(const Dims& d, int mode, const std::array<Index, 3>& idx) {
  Index col = 0;
  Index stride = 1;
  for (int m = 1; m <= 3; ++m) {
    if (m == mode) continue;
    col += idx[m - 1] * stride;
    stride *= d[m];
  }
  return col;
}

std::size_t sz(Index v) { return static_cast<std::size_t>(v); }

}  // namespace

Index Dims::operator[](int mode) const {
  check_mode(mode);
  return mode == 1 ? n1 : (mode == 2 ? n2 : n3);
}

Tensor3::Tensor3(Dims dims) : dims_(dims), values_(sz(dims.size()), 0.0) {
  if (dims.n1 < 0 || dims.n2 < 0 || dims.n3 < 0) throw UsageError("negative tensor dimension");
}

Tensor3::Tensor3(Dims dims, std::vector<double> values) : dims_(dims), values_(std::move(values)) {
  if (static_cast<Index>(values_.size()) != dims.size()) {
    throw UsageError("tensor value count " + std::to_string(values_.size()) +
                     " does not match dims " + dims_string(dims));
  }
}

Matrix Tensor3::slice(Index l) const {
  return Eigen::Map<const Matrix>(values_.data() + l * dims_.n1 * dims_.n2, dims_.n1, dims_.n2);
}

double Tensor3::frobenius_norm() const {
  return std::sqrt(kernels::active().sum_squares(values_.data(), values_.size()));
}

double Tensor3::l1_norm() const {
  double s = 0.0;
  for (double v : values_) s += std::fabs(v);
  return s;
}

double Tensor3::max_abs() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::fabs(v));
  return s;
}

bool Tensor3::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
  if (!(dims_ == other.dims_)) throw UsageError("tensor dims mismatch in +=");
  kernels::active().axpy(1.0, other.values_.data(), values_.data(), values_.size());
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
  if (!(dims_ == other.dims_)) throw UsageError("tensor dims mismatch in -=");
  kernels::active().axpy(-1.0, other.values_.data(), values_.data(), values_.size());
  return *this;
}

Tensor3& Tensor3::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

const Matrix& TuckerFactors::factor(int mode) const {
  check_mode(mode);
  return mode == 1 ? a1 : (mode == 2 ? a2 : a3);
}

Matrix& TuckerFactors::factor(int mode) {
  check_mode(mode);
  return mode == 1 ? a1 : (mode == 2 ? a2 : a3);
}

Matrix unfold(const Tensor3& t, int mode) {
  check_mode(mode);
  const Dims& d = t.dims();
  Matrix out(d[mode], d.size() / std::max<Index>(d[mode], 1));
  if (d.size() == 0) return Matrix(d[mode], 0);
  for (Index l = 0; l < d.n3; ++l) {
    for (Index j = 0; j < d.n2; ++j) {
      for (Index i = 0; i < d.n1; ++i) {
        const std::array<Index, 3> idx{i, j, l};
        out(idx[mode - 1], unfold_column(d, mode, idx)) = t(i, j, l);
      }
    }
  }
  return out;
}

Tensor3 fold(const Matrix& m, int mode, Dims dims) {
  check_mode(mode);
  const Index rows = dims[mode];
  const Index cols = rows == 0 ? 0 : dims.size() / rows;
  if (m.rows() != rows || m.cols() != cols) {
    throw UsageError("fold: matrix is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", mode-" + std::to_string(mode) +
                     " unfolding of " + dims_string(dims) + " needs " + std::to_string(rows) +
                     "x" + std::to_string(cols));
  }
  Tensor3 t(dims);
  for (Index l = 0; l < dims.n3; ++l) {
    for (Index j = 0; j < dims.n2; ++j) {
      for (Index i = 0; i < dims.n1; ++i) {
        const std::array<Index, 3> idx{i, j, l};
        t(i, j, l) = m(idx[mode - 1], unfold_column(dims, mode, idx));
      }
    }
  }
  return t;
}

namespace {

// Shared body for t x_k op(a). When transposed, a is n_k x J and op(a) = a^T.
Tensor3 mode_product_impl(const Tensor3& t, const Matrix& a, int mode, bool transposed) {
  check_mode(mode);
  const Dims& d = t.dims();
  const Index inner = transposed ? a.rows() : a.cols();
  const Index out_rows = transposed ? a.cols() : a.rows();
  if (inner != d[mode]) {
    throw UsageError("mode_product: matrix has " + std::to_string(inner) +
                     " columns but tensor mode-" + std::to_string(mode) + " size is " +
                     std::to_string(d[mode]));
  }
  Dims rd = d;
  (mode == 1 ? rd.n1 : (mode == 2 ? rd.n2 : rd.n3)) = out_rows;
  Tensor3 r(rd);
  if (rd.size() == 0) return r;

  const auto& k = kernels::active();
  using kernels::Trans;
  const std::size_t lda = sz(std::max<Index>(a.rows(), 1));
  switch (mode) {
    case 1:
      // R_(1) = op(A) T_(1): both are plain column-major buffers.
      k.gemm(transposed ? Trans::yes : Trans::no, Trans::no, sz(out_rows), sz(d.n2 * d.n3),
             sz(d.n1), 1.0, a.data(), lda, t.data(), sz(d.n1), 0.0, r.data(), sz(out_rows));
      break;
    case 2:
      // Frontal slices: R<l> = T<l> op(A)^T.
      for (Index l = 0; l < d.n3; ++l) {
        k.gemm(Trans::no, transposed ? Trans::no : Trans::yes, sz(d.n1), sz(out_rows), sz(d.n2),
               1.0, t.data() + l * d.n1 * d.n2, sz(d.n1), a.data(), lda, 0.0,
               r.data() + l * d.n1 * out_rows, sz(d.n1));
      }
      break;
    default:
      // View T as (n1 n2) x n3: R = T op(A)^T.
      k.gemm(Trans::no, transposed ? Trans::no : Trans::yes, sz(d.n1 * d.n2), sz(out_rows),
             sz(d.n3), 1.0, t.data(), sz(d.n1 * d.n2), a.data(), lda, 0.0, r.data(),
             sz(d.n1 * d.n2));
      break;
  }
  return r;
}

}  // namespace

Tensor3 mode_product(const Tensor3& t, const Matrix& a, int mode) {
  return mode_product_impl(t, a, mode, false);
}

Tensor3 mode_product_transposed(const Tensor3& t, const Matrix& a, int mode) {
  return mode_product_impl(t, a, mode, true);
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Tensor3 tucker_reconstruct(const TuckerFactors& f) {
  const Dims r = f.core.dims();
  if (f.a1.cols() != r.n1 || f.a2.cols() != r.n2 || f.a3.cols() != r.n3) {
    throw UsageError("tucker_reconstruct: factor column counts do not match core dims " +
                     dims_string(r));
  }
  return mode_product(mode_product(mode_product(f.core, f.a1, 1), f.a2, 2), f.a3, 3);
}

Tensor3 project_onto_factors(const Tensor3& t, const Matrix& a1, const Matrix& a2,
                             const Matrix& a3) {
  return mode_product_transposed(
      mode_product_transposed(mode_product_transposed(t, a1, 1), a2, 2), a3, 3);
}

Tensor3 outer(const Vector& a, const Matrix& x) {
  Tensor3 t({a.size(), x.rows(), x.cols()});
  for (Index l = 0; l < x.cols(); ++l) {
    for (Index j = 0; j < x.rows(); ++j) {
      for (Index i = 0; i < a.size(); ++i) t(i, j, l) = a(i) * x(j, l);
    }
  }
  return t;
}

double orthonormality_defect(const Matrix& a) {
  return (a.transpose() * a - Matrix::Identity(a.cols(), a.cols())).norm();
}

}  // namespace stdgr
