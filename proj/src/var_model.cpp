#include "stdgr/var_model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "stdgr/error.hpp"
#include "stdgr/kernels.hpp"
#include "stdgr/random.hpp"

namespace stdgr {

SeriesPanel SeriesPanel::from_values(Matrix values) {
  SeriesPanel p;
  p.names.reserve(static_cast<std::size_t>(values.cols()));
  for (Index j = 0; j < values.cols(); ++j) p.names.push_back("y" + std::to_string(j + 1));
  p.values = std::move(values);
  return p;
}

SeriesPanel SeriesPanel::rows(Index begin, Index count) const {
  if (begin < 0 || count < 0 || begin + count > length()) {
    throw UsageError("panel row range out of bounds");
  }
  return {names, values.middleRows(begin, count)};
}

TransitionTensor::TransitionTensor(Tensor3 w) : w_(std::move(w)) {
  if (w_.dims().n1 != w_.dims().n2) {
    throw UsageError("transition tensor must be m x m x p (got n1=" +
                     std::to_string(w_.dims().n1) + ", n2=" + std::to_string(w_.dims().n2) + ")");
  }
}

TransitionTensor TransitionTensor::from_lags(const std::vector<Matrix>& lags) {
  if (lags.empty()) throw UsageError("at least one lag matrix required");
  const Index m = lags.front().rows();
  Tensor3 w({m, m, static_cast<Index>(lags.size())});
  for (std::size_t l = 0; l < lags.size(); ++l) {
    if (lags[l].rows() != m || lags[l].cols() != m) throw UsageError("lag matrices must be m x m");
    for (Index j = 0; j < m; ++j) {
      for (Index i = 0; i < m; ++i) w(i, j, static_cast<Index>(l)) = lags[l](i, j);
    }
  }
  return TransitionTensor(std::move(w));
}

Matrix TransitionTensor::unfolded() const {
  // i1-fastest storage is already the mode-1 unfolding.
  return Eigen::Map<const Matrix>(w_.data(), m(), m() * p());
}

Vector lag_vector(const Matrix& values, Index t, Index p) {
  const Index m = values.cols();
  if (t < p || t > values.rows()) throw UsageError("not enough history for lag vector");
  Vector x(m * p);
  for (Index l = 1; l <= p; ++l) x.segment((l - 1) * m, m) = values.row(t - l).transpose();
  return x;
}

DesignPair build_design(const SeriesPanel& panel, Index p) {
  if (p < 1) throw UsageError("lag order p must be >= 1");
  if (panel.length() < p + 1) {
    throw UsageError("panel has " + std::to_string(panel.length()) +
                     " observations; VAR(" + std::to_string(p) + ") needs at least " +
                     std::to_string(p + 1));
  }
  const Index m = panel.m();
  const Index rows = panel.length() - p;
  DesignPair d;
  d.p = p;
  d.x.resize(rows, m * p);
  d.y = panel.values.bottomRows(rows);
  for (Index r = 0; r < rows; ++r) {
    const Index t = r + p;
    for (Index l = 1; l <= p; ++l) d.x.block(r, (l - 1) * m, 1, m) = panel.values.row(t - l);
  }
  return d;
}

Vector predict_one_step(const TransitionTensor& w, const Vector& lags) {
  if (lags.size() != w.m() * w.p()) {
    throw UsageError("lag vector has length " + std::to_string(lags.size()) + ", expected " +
                     std::to_string(w.m() * w.p()));
  }
  Vector out(w.m());
  kernels::active().gemm(kernels::Trans::no, kernels::Trans::no, static_cast<std::size_t>(w.m()),
                         1, static_cast<std::size_t>(lags.size()), 1.0, w.tensor().data(),
                         static_cast<std::size_t>(std::max<Index>(w.m(), 1)), lags.data(),
                         static_cast<std::size_t>(std::max<Index>(lags.size(), 1)), 0.0,
                         out.data(), static_cast<std::size_t>(std::max<Index>(w.m(), 1)));
  return out;
}

Matrix companion_matrix(const TransitionTensor& w) {
  const Index m = w.m();
  const Index p = w.p();
  Matrix c = Matrix::Zero(m * p, m * p);
  c.topRows(m) = w.unfolded();
  if (p > 1) c.bottomLeftCorner(m * (p - 1), m * (p - 1)).setIdentity();
  return c;
}

double spectral_radius(const TransitionTensor& w) {
  if (w.m() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(companion_matrix(w), false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_stable(const TransitionTensor& w, double margin) {
  return spectral_radius(w) <= 1.0 - margin;
}

namespace {

// F with F F^T = cov. Cholesky when positive definite, otherwise the
// symmetric square root (covers singular PSD matrices such as zero).
Matrix noise_factor(const Matrix& cov) {
  const Index m = cov.rows();
  if (cov.cols() != m) throw UsageError("noise covariance must be square");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw UsageError("noise covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  if (es.eigenvalues().minCoeff() < -1e-12) {
    throw UsageError("noise covariance must be positive semidefinite");
  }
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0) return llt.matrixL();
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

SeriesPanel simulate(const TransitionTensor& w, const NoiseSpec& noise, Index length,
                     const SimulationOptions& options) {
  if (length < 1) throw UsageError("simulation length must be >= 1");
  if (options.burn_in < 0) throw UsageError("burn-in must be non-negative");
  const Index m = w.m();
  const Index p = w.p();
  if (noise.covariance.rows() != m) throw UsageError("noise covariance must be m x m");
  const Matrix factor = noise_factor(noise.covariance);
  if (!is_stable(w, 1e-8)) {
    throw UnstableModelError("transition tensor is not stable (companion spectral radius " +
                             std::to_string(spectral_radius(w)) + ")");
  }

  const Index total = options.burn_in + length;
  Matrix all = Matrix::Zero(p + total, m);
  if (options.initial_lags) {
    const Matrix& init = *options.initial_lags;
    if (init.rows() != p || init.cols() != m) throw UsageError("initial lags must be p x m");
    // Row p - i holds y_{-i}.
    for (Index i = 1; i <= p; ++i) all.row(p - i) = init.row(i - 1);
  }

  Rng rng(noise.seed);
  const Matrix w1 = w.unfolded();
  for (Index t = p; t < p + total; ++t) {
    const Vector x = lag_vector(all, t, p);
    const Vector z = rng.normal_vector(m);
    all.row(t) = (w1 * x + factor * z).transpose();
  }
  return SeriesPanel::from_values(all.bottomRows(length));
}

double mse(const Matrix& truth, const Matrix& pred) {
  if (truth.rows() != pred.rows() || truth.cols() != pred.cols()) {
    throw UsageError("mse: shape mismatch");
  }
  if (truth.size() == 0) throw UsageError("mse: empty panels");
  return (truth - pred).squaredNorm() / static_cast<double>(truth.size());
}

double mse(const SeriesPanel& truth, const SeriesPanel& pred) { return mse(truth.values, pred.values); }

Standardizer Standardizer::fit(const Matrix& values, Index rows) {
  if (rows < 2 || rows > values.rows()) throw UsageError("standardizer needs >= 2 training rows");
  const auto block = values.topRows(rows);
  Standardizer s;
  s.mean = block.colwise().mean().transpose();
  s.scale.resize(values.cols());
  for (Index j = 0; j < values.cols(); ++j) {
    const double var = (block.col(j).array() - s.mean(j)).square().sum() / static_cast<double>(rows - 1);
    s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(Index m) { return {Vector::Zero(m), Vector::Ones(m)}; }

Matrix Standardizer::apply(const Matrix& values) const {
  return (values.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Matrix Standardizer::invert(const Matrix& standardized) const {
  return (standardized.array().rowwise() * scale.transpose().array()).matrix().rowwise() +
         mean.transpose();
}

}  // namespace stdgr
