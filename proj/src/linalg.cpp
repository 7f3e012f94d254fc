#include "stdgr/linalg.hpp"

#include <cmath>
#include <string>

#include "stdgr/error.hpp"

namespace stdgr {

ThinSvd thin_svd(const Matrix& m) {
  ThinSvd out;
  if (m.rows() == 0 || m.cols() == 0) {
    out.u = Matrix(m.rows(), 0);
    out.v = Matrix(m.cols(), 0);
    out.singular = Vector(0);
    return out;
  }
  // Jacobi is the accurate path for the small and moderately sized
  // matrices here; BDCSVD would switch to Jacobi below 16 columns anyway.
  Eigen::JacobiSVD<Matrix> svd;
  if (m.rows() >= m.cols()) {
    svd.compute(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixU();
    out.v = svd.matrixV();
  } else {
    // Decompose the tall transpose; Jacobi on wide inputs is slower.
    svd.compute(m.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixV();
    out.v = svd.matrixU();
  }
  out.singular = svd.singularValues();
  return out;
}

Vector singular_values(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return Vector(0);
  if (m.rows() >= m.cols()) return Eigen::JacobiSVD<Matrix>(m).singularValues();
  return Eigen::JacobiSVD<Matrix>(m.transpose()).singularValues();
}

void canonicalize_signs(Matrix& columns) {
  for (Index j = 0; j < columns.cols(); ++j) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index i = 0; i < columns.rows(); ++i) {
      const double a = std::fabs(columns(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (columns.rows() > 0 && columns(best, j) < 0.0) columns.col(j) *= -1.0;
  }
}

Matrix leading_left_singular_vectors(const Matrix& m, Index r) {
  if (r < 0 || r > m.rows() || r > std::min(m.rows(), m.cols())) {
    throw UsageError("requested " + std::to_string(r) + " singular vectors of a " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + " matrix");
  }
  Matrix u = thin_svd(m).u.leftCols(r);
  canonicalize_signs(u);
  return u;
}

double spectral_norm(const Matrix& m) {
  const Vector s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(0);
}

Matrix svt(const Matrix& m, double tau) {
  if (tau < 0.0) throw UsageError("svt threshold must be non-negative");
  const ThinSvd d = thin_svd(m);
  const Vector shrunk = (d.singular.array() - tau).cwiseMax(0.0).matrix();
  return d.u * shrunk.asDiagonal() * d.v.transpose();
}

Matrix procrustes(const Matrix& m) {
  if (m.cols() > m.rows()) {
    throw UsageError("procrustes needs rows >= cols (got " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ")");
  }
  const ThinSvd d = thin_svd(m);
  return d.u * d.v.transpose();
}

}  // namespace stdgr
