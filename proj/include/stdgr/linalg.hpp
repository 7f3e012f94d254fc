#pragma once

// Thin wrappers over Eigen's dense decompositions with the conventions the
// estimator relies on (thin factors, deterministic signs).

#include "stdgr/tensor.hpp"

namespace stdgr {

struct ThinSvd {
  Matrix u;          // rows x k
  Vector singular;   // k, descending
  Matrix v;          // cols x k
};

// k = min(rows, cols).
ThinSvd thin_svd(const Matrix& m);

Vector singular_values(const Matrix& m);

// Flip each column so its largest-magnitude entry (first on ties) is positive.
void canonicalize_signs(Matrix& columns);

// Leading r left singular vectors of m with canonical signs.
Matrix leading_left_singular_vectors(const Matrix& m, Index r);

double spectral_norm(const Matrix& m);

// Singular value thresholding: U max(S - tau, 0) V^T.
Matrix svt(const Matrix& m, double tau);

// Orthonormal polar factor U V^T of the thin SVD; maximises tr(A^T m) over
// column-orthonormal A. Requires rows(m) >= cols(m).
Matrix procrustes(const Matrix& m);

}  // namespace stdgr
