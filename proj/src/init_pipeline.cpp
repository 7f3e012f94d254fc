#include "stdgr/init_pipeline.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "stdgr/error.hpp"
#include "stdgr/linalg.hpp"

namespace stdgr {

double default_nnm_lambda(Index m, Index p, Index samples) {
  return std::sqrt(std::log(static_cast<double>(m * m * p)) / static_cast<double>(samples));
}

namespace {

struct Moments {
  Matrix sxx;  // X^T X / T
  Matrix syx;  // Y^T X / T
  double syy = 0.0;
};

Moments design_moments(const DesignPair& d) {
  const double inv_t = 1.0 / static_cast<double>(d.samples());
  Moments mo;
  mo.sxx = (d.x.transpose() * d.x) * inv_t;
  mo.syx = (d.y.transpose() * d.x) * inv_t;
  mo.syy = d.y.squaredNorm() * inv_t;
  return mo;
}

double smooth_loss(const Matrix& w1, const Moments& mo) {
  return (w1 * mo.sxx).cwiseProduct(w1).sum() - 2.0 * w1.cwiseProduct(mo.syx).sum() + mo.syy;
}

double nuclear_norm(const Matrix& a) { return singular_values(a).sum(); }

}  // namespace

double nnm_objective(const Matrix& w1, const DesignPair& d, double lambda) {
  const Matrix resid = d.y - d.x * w1.transpose();
  return resid.squaredNorm() / static_cast<double>(d.samples()) + lambda * nuclear_norm(w1);
}

NnmResult nnm_estimate(const DesignPair& d, const NnmConfig& cfg) {
  const Index m = d.m();
  const Index p = d.p;
  if (d.samples() < 1) throw UsageError("nnm_estimate needs at least one sample");
  if (cfg.tol <= 0.0) throw UsageError("nnm tolerance must be positive");
  NnmResult out;
  out.lambda = cfg.lambda > 0.0 ? cfg.lambda : default_nnm_lambda(m, p, d.samples());

  const Moments mo = design_moments(d);
  const double lq =
      2.0 * (mo.sxx.size() == 0 ? 0.0
                                : Eigen::SelfAdjointEigenSolver<Matrix>(mo.sxx, Eigen::EigenvaluesOnly)
                                      .eigenvalues()
                                      .maxCoeff());
  Matrix w1 = Matrix::Zero(m, m * p);
  double objective = smooth_loss(w1, mo);
  out.objective_trace.push_back(objective);

  if (lq <= 0.0) {
    // Zero design: the loss is constant, so the nuclear norm pins W at 0.
    out.converged = true;
  } else {
    const double step = 1.0 / lq;
    const double tau = out.lambda * step;
    for (Index k = 0; k < cfg.max_iter; ++k) {
      const Matrix grad = 2.0 * (w1 * mo.sxx - mo.syx);
      Matrix next = svt(w1 - step * grad, tau);
      const double change = (next - w1).norm();
      const double base = w1.norm();
      w1 = std::move(next);
      objective = smooth_loss(w1, mo) + out.lambda * nuclear_norm(w1);
      out.objective_trace.push_back(objective);
      out.iterations = k + 1;
      if (change <= cfg.tol * std::max(base, std::numeric_limits<double>::min())) {
        out.converged = true;
        break;
      }
    }
  }
  Tensor3 w({m, m, p}, std::vector<double>(w1.data(), w1.data() + w1.size()));
  out.w = TransitionTensor(std::move(w));
  return out;
}

Index RankTriple::operator[](int mode) const {
  switch (mode) {
    case 1:
      return r1;
    case 2:
      return r2;
    case 3:
      return r3;
    default:
      throw UsageError("mode index must be 1, 2 or 3");
  }
}

void validate_ranks(const RankTriple& r, Index m, Index p) {
  if (r.r1 < 1 || r.r1 > m || r.r2 < 1 || r.r2 > m || r.r3 < 1 || r.r3 > p) {
    throw UsageError("Tucker ranks (" + std::to_string(r.r1) + "," + std::to_string(r.r2) + "," +
                     std::to_string(r.r3) + ") invalid for m=" + std::to_string(m) +
                     ", p=" + std::to_string(p));
  }
}

TuckerFactors hosvd(const TransitionTensor& w, const RankTriple& ranks) {
  validate_ranks(ranks, w.m(), w.p());
  TuckerFactors f;
  f.a1 = leading_left_singular_vectors(unfold(w.tensor(), 1), ranks.r1);
  f.a2 = leading_left_singular_vectors(unfold(w.tensor(), 2), ranks.r2);
  f.a3 = leading_left_singular_vectors(unfold(w.tensor(), 3), ranks.r3);
  f.core = project_onto_factors(w.tensor(), f.a1, f.a2, f.a3);
  return f;
}

double default_ridge_constant(Index m, Index p, Index samples) {
  const double t = static_cast<double>(samples);
  return std::sqrt(static_cast<double>(m * p) * std::log(t) / (50.0 * t));
}

Index ridge_ratio_rank(const Vector& singular, Index n, double c_bar) {
  if (c_bar <= 0.0) throw UsageError("ridge constant must be positive");
  if (n <= 1) return 1;
  Vector s = Vector::Zero(n);
  const Index k = std::min<Index>(n, singular.size());
  s.head(k) = singular.head(k);
  Index best = 1;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (Index j = 1; j <= n - 1; ++j) {
    const double ratio = (s(j) + c_bar) / (s(j - 1) + c_bar);
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best = j;
    }
  }
  return best;
}

RankTriple select_ranks(const TransitionTensor& w_init, double c_bar) {
  const Tensor3& t = w_init.tensor();
  RankTriple r;
  r.r1 = ridge_ratio_rank(singular_values(unfold(t, 1)), t.dims().n1, c_bar);
  r.r2 = ridge_ratio_rank(singular_values(unfold(t, 2)), t.dims().n2, c_bar);
  r.r3 = ridge_ratio_rank(singular_values(unfold(t, 3)), t.dims().n3, c_bar);
  return r;
}

const Matrix& LaplacianSet::operator[](int mode) const {
  switch (mode) {
    case 1:
      return l1;
    case 2:
      return l2;
    case 3:
      return l3;
    default:
      throw UsageError("mode index must be 1, 2 or 3");
  }
}

Matrix gaussian_weights(const Matrix& rows, double epsilon) {
  if (epsilon <= 0.0) throw UsageError("kernel bandwidth must be positive");
  const Index n = rows.rows();
  const double denom = 2.0 * epsilon * epsilon;
  Matrix z(n, n);
  for (Index l = 0; l < n; ++l) {
    z(l, l) = 1.0;
    for (Index t = l + 1; t < n; ++t) {
      const double d2 = (rows.row(l) - rows.row(t)).squaredNorm();
      z(l, t) = z(t, l) = std::exp(-d2 / denom);
    }
  }
  return z;
}

Matrix graph_laplacian(const Matrix& weights) {
  Matrix l = -weights;
  for (Index i = 0; i < weights.rows(); ++i) l(i, i) += weights.row(i).sum();
  return l;
}

LaplacianSet build_laplacians(const TuckerFactors& f, double epsilon) {
  LaplacianSet set;
  set.epsilon = epsilon;
  set.l1 = graph_laplacian(gaussian_weights(f.a1, epsilon));
  set.l2 = graph_laplacian(gaussian_weights(f.a2, epsilon));
  set.l3 = graph_laplacian(gaussian_weights(f.a3, epsilon));
  return set;
}

}  // namespace stdgr
