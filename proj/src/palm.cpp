#include "stdgr/palm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stdgr/error.hpp"
#include "stdgr/kernels.hpp"
#include "stdgr/linalg.hpp"

namespace stdgr {
namespace {

std::size_t sz(Index v) { return static_cast<std::size_t>(std::max<Index>(v, 0)); }

Tensor3 from_unfolded1(const Matrix& w1, Index m, Index p) {
  return Tensor3({m, m, p}, std::vector<double>(w1.data(), w1.data() + w1.size()));
}

void check_feasible(const SolverState& s, double c) {
  if (s.g.max_abs() > c + 1e-12) {
    throw UsageError("infeasible state: ||G||_inf = " + std::to_string(s.g.max_abs()) +
                     " exceeds c = " + std::to_string(c));
  }
  for (int i = 0; i < 3; ++i) {
    if (orthonormality_defect(s.a[i]) > 1e-10) {
      throw UsageError("infeasible state: factor A" + std::to_string(i + 1) +
                       " is not column-orthonormal");
    }
  }
}

}  // namespace

void StdgrConfig::validate() const {
  if (!(beta > 0.0)) throw ConfigError("beta must be > 0");
  for (int i = 0; i < 3; ++i) {
    if (!(alpha[i] >= 0.0)) throw ConfigError("alpha must be >= 0");
    if (!(gamma[i] > 0.0)) throw ConfigError("gamma must be > 0");
  }
  if (!(c > 0.0)) throw ConfigError("c must be > 0");
  if (!(a_bar1 > 1.0)) throw ConfigError("abar1 must be > 1 so that rho_i > L_i");
  if (!(a_bar2 > 1.0)) throw ConfigError("abar2 must be > 1 so that rho_{4+j} > gamma_j");
  if (!(tol > 0.0)) throw ConfigError("tol must be > 0");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
}

SolverState SolverState::from_factors(const TuckerFactors& f) {
  SolverState s;
  s.g = f.core;
  s.a = {f.a1, f.a2, f.a3};
  s.u = s.a;
  return s;
}

LossModel::LossModel(const DesignPair& d) : design(&d) {
  if (d.samples() < 1) throw UsageError("design has no samples");
  const double inv_t = 1.0 / static_cast<double>(d.samples());
  const auto& k = kernels::active();
  using kernels::Trans;
  const Index t = d.samples();
  const Index n = d.x.cols();
  sxx.resize(n, n);
  syx.resize(d.m(), n);
  k.gemm(Trans::yes, Trans::no, sz(n), sz(n), sz(t), inv_t, d.x.data(), sz(t), d.x.data(), sz(t),
         0.0, sxx.data(), sz(n));
  k.gemm(Trans::yes, Trans::no, sz(d.m()), sz(n), sz(t), inv_t, d.y.data(), sz(t), d.x.data(),
         sz(t), 0.0, syx.data(), sz(d.m()));
}

double LossModel::loss(const Tensor3& w) const {
  const DesignPair& d = *design;
  const Index t = d.samples();
  const Index m = d.m();
  // R = Y - X W_(1)^T
  Matrix resid = d.y;
  kernels::active().gemm(kernels::Trans::no, kernels::Trans::yes, sz(t), sz(m), sz(d.x.cols()),
                         -1.0, d.x.data(), sz(t), w.data(), sz(m), 1.0, resid.data(), sz(t));
  return kernels::active().sum_squares(resid.data(), sz(resid.size())) /
         (2.0 * static_cast<double>(t));
}

double StepSizes::rho_bar(const std::array<double, 3>& gamma) const {
  double r = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) r = std::min(r, rho[i] - lipschitz[i]);
  for (int j = 0; j < 3; ++j) r = std::min(r, rho[4 + j] - gamma[j]);
  return r;
}

void StepSizes::validate(const std::array<double, 3>& gamma) const {
  for (int i = 0; i < 4; ++i) {
    if (!(rho[i] > lipschitz[i])) {
      throw ConfigError("step size rho_" + std::to_string(i + 1) + " = " + std::to_string(rho[i]) +
                        " must exceed L_" + std::to_string(i + 1) + " = " +
                        std::to_string(lipschitz[i]));
    }
  }
  for (int j = 0; j < 3; ++j) {
    if (!(rho[4 + j] > gamma[j])) {
      throw ConfigError("step size rho_" + std::to_string(5 + j) + " must exceed gamma_" +
                        std::to_string(j + 1));
    }
  }
}

StepSizes lipschitz_constants(const DesignPair& d, const StdgrConfig& cfg, const RankTriple& ranks) {
  if (d.samples() < 1) throw UsageError("design has no samples");
  StepSizes s;
  s.c1 = d.x.squaredNorm() / static_cast<double>(d.samples());
  s.nu = std::sqrt(static_cast<double>(ranks.r1 * ranks.r2 * ranks.r3)) * cfg.c;
  s.lipschitz[0] = std::max(s.c1, kLipschitzFloor);
  for (int i = 0; i < 3; ++i) s.lipschitz[1 + i] = s.nu * s.nu * s.c1 + cfg.gamma[i];
  for (int i = 0; i < 4; ++i) s.rho[i] = cfg.a_bar1 * s.lipschitz[i];
  for (int j = 0; j < 3; ++j) s.rho[4 + j] = cfg.a_bar2 * cfg.gamma[j];
  return s;
}

Tensor3 grad_q_full(const Tensor3& w, const LossModel& loss) {
  const Index m = loss.m();
  const Index p = loss.p();
  if (!(w.dims() == Dims{m, m, p})) throw UsageError("grad_q_full: tensor dims do not match design");
  // W_(1) Sxx - Syx
  Matrix g = loss.syx;
  kernels::active().gemm(kernels::Trans::no, kernels::Trans::no, sz(m), sz(m * p), sz(m * p), 1.0,
                         w.data(), sz(m), loss.sxx.data(), sz(m * p), -1.0, g.data(), sz(m));
  return from_unfolded1(g, m, p);
}

Tensor3 grad_q_full(const TransitionTensor& w, const DesignPair& d) {
  if (d.m() != w.m() || d.p != w.p()) throw UsageError("grad_q_full: shape mismatch");
  return grad_q_full(w.tensor(), LossModel(d));
}

Tensor3 grad_core(const SolverState& s, const LossModel& loss) {
  const Tensor3 w = tucker_reconstruct(s.factors());
  return project_onto_factors(grad_q_full(w, loss), s.a[0], s.a[1], s.a[2]);
}

Matrix grad_factor(const SolverState& s, int mode, const LossModel& loss, const StdgrConfig& cfg) {
  const Tensor3 w = tucker_reconstruct(s.factors());
  const Tensor3 grad = grad_q_full(w, loss);
  // (grad x_{j} A_j^T for j != mode)_(mode) G_(mode)^T, i.e. the unfolding
  // times the Kronecker product of the other two factors.
  Tensor3 partial = grad;
  for (int j = 1; j <= 3; ++j) {
    if (j != mode) partial = mode_product_transposed(partial, s.a[j - 1], j);
  }
  const Matrix q = unfold(partial, mode) * unfold(s.g, mode).transpose();
  return q - cfg.gamma[mode - 1] * (s.u[mode - 1] - s.a[mode - 1]);
}

PsiGradients grad_partials(const SolverState& s, const LossModel& loss, const StdgrConfig& cfg) {
  PsiGradients out;
  out.g = grad_core(s, loss);
  for (int i = 0; i < 3; ++i) {
    out.a[i] = grad_factor(s, i + 1, loss, cfg);
    out.u[i] = cfg.gamma[i] * (s.u[i] - s.a[i]);
  }
  return out;
}

double objective(const SolverState& s, const LossModel& loss, const LaplacianSet& lap,
                 const StdgrConfig& cfg) {
  check_feasible(s, cfg.c);
  double f = loss.loss(tucker_reconstruct(s.factors())) + cfg.beta * s.g.l1_norm();
  for (int i = 0; i < 3; ++i) {
    f += cfg.alpha[i] * (s.u[i].transpose() * lap[i + 1] * s.u[i]).trace();
    f += 0.5 * cfg.gamma[i] * (s.u[i] - s.a[i]).squaredNorm();
  }
  return f;
}

double objective(const SolverState& s, const DesignPair& d, const LaplacianSet& lap,
                 const StdgrConfig& cfg) {
  return objective(s, LossModel(d), lap, cfg);
}

Tensor3 prox_core(const Tensor3& l, double tau, double c) {
  if (tau < 0.0) throw UsageError("prox threshold must be non-negative");
  if (!(c > 0.0)) throw UsageError("box bound must be positive");
  Tensor3 out(l.dims());
  kernels::active().prox_soft_box(l.data(), out.data(), sz(l.size()), tau, c);
  return out;
}

Matrix update_u(const Matrix& u_prev, const Matrix& a, const Matrix& laplacian, double alpha,
                double gamma, double rho) {
  const Matrix rhs = rho * u_prev - gamma * (u_prev - a);
  if (alpha == 0.0) return rhs / rho;
  const Matrix system =
      2.0 * alpha * laplacian + rho * Matrix::Identity(laplacian.rows(), laplacian.cols());
  return system.llt().solve(rhs);
}

std::array<double, 7> convergence_metrics(const SolverState& prev, const SolverState& next) {
  auto rel = [](double num, double den) {
    if (den == 0.0) return num <= 1e-14 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
  };
  std::array<double, 7> out{};
  out[0] = rel((next.g - prev.g).frobenius_norm(), prev.g.frobenius_norm());
  for (int i = 0; i < 3; ++i) {
    out[1 + i] = rel((next.a[i] - prev.a[i]).norm(), prev.a[i].norm());
    out[4 + i] = rel((next.u[i] - prev.u[i]).norm(), prev.u[i].norm());
  }
  return out;
}

PalmSweep::PalmSweep(const LossModel& loss, const LaplacianSet& lap, const StdgrConfig& cfg,
                     const StepSizes& steps)
    : loss_(loss), lap_(lap), cfg_(cfg), steps_(steps) {
  for (int i = 0; i < 3; ++i) {
    const Matrix& l = lap_[i + 1];
    aux_systems_[i].compute(2.0 * cfg_.alpha[i] * l +
                            steps_.rho[4 + i] * Matrix::Identity(l.rows(), l.cols()));
  }
}

void PalmSweep::update_core(SolverState& s) const {
  const double rho = steps_.rho[0];
  Tensor3 l = s.g;
  l -= (1.0 / rho) * grad_core(s, loss_);
  s.g = prox_core(l, cfg_.beta / rho, cfg_.c);
  core_max_abs_ = std::max(core_max_abs_, s.g.max_abs());
}

Matrix PalmSweep::factor_update_input(const SolverState& s, int mode) const {
  return s.a[mode - 1] - (1.0 / steps_.rho[mode]) * grad_factor(s, mode, loss_, cfg_);
}

void PalmSweep::update_factor(SolverState& s, int mode) const {
  s.a[mode - 1] = procrustes(factor_update_input(s, mode));
  orth_defect_ = std::max(orth_defect_, orthonormality_defect(s.a[mode - 1]));
}

void PalmSweep::update_aux(SolverState& s, int mode) const {
  const int i = mode - 1;
  const double rho = steps_.rho[4 + i];
  const Matrix rhs = rho * s.u[i] - cfg_.gamma[i] * (s.u[i] - s.a[i]);
  s.u[i] = aux_systems_[i].solve(rhs);
}

void PalmSweep::sweep(SolverState& s) const {
  core_max_abs_ = 0.0;
  orth_defect_ = 0.0;
  update_core(s);
  for (int mode = 1; mode <= 3; ++mode) update_factor(s, mode);
  for (int mode = 1; mode <= 3; ++mode) update_aux(s, mode);
}

FitResult solve(const DesignPair& d, const LaplacianSet& lap, const StdgrConfig& cfg,
                const TuckerFactors& init, const IterationCallback& on_iteration) {
  cfg.validate();
  const Dims r = init.ranks();
  const RankTriple ranks{r.n1, r.n2, r.n3};
  validate_ranks(ranks, d.m(), d.p);
  if (init.a1.rows() != d.m() || init.a2.rows() != d.m() || init.a3.rows() != d.p) {
    throw UsageError("initial factors do not match the design dimensions");
  }
  for (int i = 1; i <= 3; ++i) {
    if (orthonormality_defect(init.factor(i)) > 1e-10) {
      throw UsageError("initial factor A" + std::to_string(i) + " is not column-orthonormal");
    }
  }

  FitResult out;
  const StepSizes steps = lipschitz_constants(d, cfg, ranks);
  steps.validate(cfg.gamma);
  out.steps = steps;
  out.rho_bar = steps.rho_bar(cfg.gamma);

  SolverState state = SolverState::from_factors(init);
  if (state.g.max_abs() > cfg.c) {
    for (double& v : state.g.values()) v = std::clamp(v, -cfg.c, cfg.c);
    out.notes.push_back("initial core clipped to [-c, c]");
  }

  const LossModel loss(d);
  const PalmSweep palm(loss, lap, cfg, steps);
  double f_prev = objective(state, loss, lap, cfg);
  out.objective_trace.push_back(f_prev);

  for (Index k = 1; k <= cfg.max_iter; ++k) {
    const SolverState prev = state;
    palm.sweep(state);
    const double f = objective(state, loss, lap, cfg);

    IterationRecord rec;
    rec.k = k;
    rec.objective = f;
    rec.lambda = convergence_metrics(prev, state);
    rec.sum_sq_change = (state.g - prev.g).frobenius_norm();
    rec.sum_sq_change *= rec.sum_sq_change;
    for (int i = 0; i < 3; ++i) {
      rec.sum_sq_change += (state.a[i] - prev.a[i]).squaredNorm();
      rec.sum_sq_change += (state.u[i] - prev.u[i]).squaredNorm();
    }
    rec.decrease_slack = f_prev - f - 0.5 * out.rho_bar * rec.sum_sq_change;
    rec.core_max_abs = palm.last_core_max_abs();
    rec.orthonormality_defect = palm.last_orthonormality_defect();

    out.objective_trace.push_back(f);
    const double max_lambda = *std::max_element(rec.lambda.begin(), rec.lambda.end());
    out.lambda_trace.push_back(max_lambda);
    out.records.push_back(rec);
    out.iterations = k;
    if (on_iteration) on_iteration(rec);
    f_prev = f;
    if (max_lambda <= cfg.tol) {
      out.converged = true;
      break;
    }
  }

  out.factors = state.factors();
  out.u = state.u;
  out.w_hat = TransitionTensor(tucker_reconstruct(out.factors));
  return out;
}

}  // namespace stdgr
