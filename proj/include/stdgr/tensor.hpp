#pragma once

// Dense third-order tensors and the Tucker model.
//
// Storage is i1-fastest, then i2, then i3, so the mode-1 unfolding of a
// tensor is its value buffer read as a column-major n1 x (n2 n3) matrix.
// Unfolding column indices follow the Kolda map: for mode k the remaining
// indices are ordered with the lower mode varying fastest.

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace stdgr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct Dims {
  Index n1 = 0;
  Index n2 = 0;
  Index n3 = 0;

  Index operator[](int mode) const;  // mode in {1, 2, 3}
  Index size() const { return n1 * n2 * n3; }
  bool operator==(const Dims&) const = default;
};

class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Dims dims);
  Tensor3(Dims dims, std::vector<double> values);

  static Tensor3 zeros(Dims dims) { return Tensor3(dims); }

  const Dims& dims() const { return dims_; }
  Index size() const { return dims_.size(); }

  // Zero-based (i1, i2, i3).
  double& operator()(Index i, Index j, Index l) { return values_[offset(i, j, l)]; }
  double operator()(Index i, Index j, Index l) const { return values_[offset(i, j, l)]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  // Frontal slice l (zero-based) as an n1 x n2 matrix.
  Matrix slice(Index l) const;

  double frobenius_norm() const;
  double l1_norm() const;
  double max_abs() const;
  bool all_finite() const;

  Tensor3& operator+=(const Tensor3& other);
  Tensor3& operator-=(const Tensor3& other);
  Tensor3& operator*=(double s);

  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }
  bool operator==(const Tensor3&) const = default;

 private:
  Index offset(Index i, Index j, Index l) const { return i + dims_.n1 * (j + dims_.n2 * l); }

  Dims dims_;
  std::vector<double> values_;
};

struct TuckerFactors {
  Tensor3 core;  // r1 x r2 x r3
  Matrix a1;     // m x r1
  Matrix a2;     // m x r2
  Matrix a3;     // p x r3

  const Matrix& factor(int mode) const;
  Matrix& factor(int mode);
  Dims ranks() const { return core.dims(); }
  Dims full_dims() const { return {a1.rows(), a2.rows(), a3.rows()}; }
};

Matrix unfold(const Tensor3& t, int mode);
Tensor3 fold(const Matrix& m, int mode, Dims dims);

// t x_k a: replaces n_k by rows(a).
Tensor3 mode_product(const Tensor3& t, const Matrix& a, int mode);
// t x_k a^T without materialising the transpose.
Tensor3 mode_product_transposed(const Tensor3& t, const Matrix& a, int mode);

Matrix kronecker(const Matrix& a, const Matrix& b);

// core x1 A1 x2 A2 x3 A3
Tensor3 tucker_reconstruct(const TuckerFactors& f);
// t x1 A1^T x2 A2^T x3 A3^T
Tensor3 project_onto_factors(const Tensor3& t, const Matrix& a1, const Matrix& a2, const Matrix& a3);

// Outer product a o X with (a o X)_{ijl} = a_i X_{jl}.
Tensor3 outer(const Vector& a, const Matrix& x);

// ||A^T A - I||_F
double orthonormality_defect(const Matrix& a);

}  // namespace stdgr
