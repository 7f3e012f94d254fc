#pragma once

// Sparse Tucker decomposition with graph regularization, solved by proximal
// alternating linearized minimization over seven blocks:
//
//   F = 1/(2T) sum_t ||y_t - (G x1 A1 x2 A2 x3 A3)_(1) x_t||^2 + beta ||G||_1
//       + sum_i alpha_i tr(U_i^T L_i U_i) + sum_i gamma_i/2 ||U_i - A_i||_F^2
//   s.t. ||G||_inf <= c, A_i^T A_i = I.
//
// Blocks are updated in the order G, A1, A2, A3, U1, U2, U3, each using the
// freshest values of the blocks before it.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stdgr/init_pipeline.hpp"
#include "stdgr/tensor.hpp"
#include "stdgr/var_model.hpp"

namespace stdgr {

struct StdgrConfig {
  double beta = 0.001;
  std::array<double, 3> alpha{0.001, 0.001, 0.001};
  std::array<double, 3> gamma{0.1, 0.1, 0.1};
  double c = 1.0;
  double a_bar1 = 1.1;   // rho_1..rho_4 = a_bar1 * L_1..L_4
  double a_bar2 = 10.0;  // rho_5..rho_7 = a_bar2 * gamma_1..gamma_3
  double tol = 3e-3;
  Index max_iter = 200;
  std::optional<RankTriple> ranks;  // empty: select automatically

  // Throws ConfigError on out-of-domain values.
  void validate() const;
};

struct SolverState {
  Tensor3 g;
  std::array<Matrix, 3> a;
  std::array<Matrix, 3> u;

  static SolverState from_factors(const TuckerFactors& f);  // U_i = A_i
  TuckerFactors factors() const { return {g, a[0], a[1], a[2]}; }
};

// Second moments of the design; the loss gradient only needs these.
struct LossModel {
  Matrix sxx;  // X^T X / T
  Matrix syx;  // Y^T X / T
  const DesignPair* design = nullptr;

  explicit LossModel(const DesignPair& d);
  Index m() const { return syx.rows(); }
  Index p() const { return design->p; }
  // (1/2T) sum ||y_t - W_(1) x_t||^2, from the residuals.
  double loss(const Tensor3& w) const;
};

struct StepSizes {
  std::array<double, 7> rho{};
  std::array<double, 4> lipschitz{};
  double nu = 0.0;
  double c1 = 0.0;

  // min(rho_i - L_i, rho_{4+j} - gamma_j)
  double rho_bar(const std::array<double, 3>& gamma) const;
  // Throws ConfigError unless every rho strictly exceeds its constant.
  void validate(const std::array<double, 3>& gamma) const;
};

// Smallest admissible Lipschitz constant; keeps the step finite when the
// design is identically zero.
inline constexpr double kLipschitzFloor = 1e-12;

StepSizes lipschitz_constants(const DesignPair& d, const StdgrConfig& cfg, const RankTriple& ranks);

// Full-tensor loss gradient (1/T) sum_t (W_(1) x_t - y_t) o X_t.
Tensor3 grad_q_full(const Tensor3& w, const LossModel& loss);
Tensor3 grad_q_full(const TransitionTensor& w, const DesignPair& d);

struct PsiGradients {
  Tensor3 g;
  std::array<Matrix, 3> a;
  std::array<Matrix, 3> u;
};

PsiGradients grad_partials(const SolverState& s, const LossModel& loss, const StdgrConfig& cfg);

// Individual partials, for the block updates.
Tensor3 grad_core(const SolverState& s, const LossModel& loss);
Matrix grad_factor(const SolverState& s, int mode, const LossModel& loss, const StdgrConfig& cfg);

double objective(const SolverState& s, const LossModel& loss, const LaplacianSet& lap,
                 const StdgrConfig& cfg);
double objective(const SolverState& s, const DesignPair& d, const LaplacianSet& lap,
                 const StdgrConfig& cfg);

// Entrywise sign(l) max(|l| - tau, 0) if |l| <= c + tau, else sign(l) c.
Tensor3 prox_core(const Tensor3& l, double tau, double c);

// (2 alpha L + rho I)^{-1} (rho U - gamma (U - A))
Matrix update_u(const Matrix& u_prev, const Matrix& a, const Matrix& laplacian, double alpha,
                double gamma, double rho);

std::array<double, 7> convergence_metrics(const SolverState& prev, const SolverState& next);

// One cyclic sweep. The block functions are exposed so the update order
// can be checked against the sweep.
class PalmSweep {
 public:
  PalmSweep(const LossModel& loss, const LaplacianSet& lap, const StdgrConfig& cfg,
            const StepSizes& steps);

  void update_core(SolverState& s) const;
  // The matrix whose polar factor becomes A_mode.
  Matrix factor_update_input(const SolverState& s, int mode) const;
  void update_factor(SolverState& s, int mode) const;
  void update_aux(SolverState& s, int mode) const;
  void sweep(SolverState& s) const;

  // Largest ||G||_inf and ||A_i^T A_i - I||_F seen after any block update of
  // the last sweep.
  double last_core_max_abs() const { return core_max_abs_; }
  double last_orthonormality_defect() const { return orth_defect_; }

 private:
  const LossModel& loss_;
  const LaplacianSet& lap_;
  const StdgrConfig& cfg_;
  StepSizes steps_;
  std::array<Eigen::LLT<Matrix>, 3> aux_systems_;
  mutable double core_max_abs_ = 0.0;
  mutable double orth_defect_ = 0.0;
};

struct IterationRecord {
  Index k = 0;
  double objective = 0.0;
  std::array<double, 7> lambda{};
  double sum_sq_change = 0.0;   // sum of the seven squared block changes
  double decrease_slack = 0.0;  // F^{k-1} - F^k - rho_bar/2 * sum_sq_change
  double core_max_abs = 0.0;
  double orthonormality_defect = 0.0;
};

struct FitResult {
  TransitionTensor w_hat;
  TuckerFactors factors;
  std::array<Matrix, 3> u;
  std::vector<double> objective_trace;  // F^0, F^1, ...
  std::vector<double> lambda_trace;     // max_j Lambda_j per iteration
  std::vector<IterationRecord> records;
  StepSizes steps;
  double rho_bar = 0.0;
  Index iterations = 0;
  bool converged = false;
  std::vector<std::string> notes;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

FitResult solve(const DesignPair& d, const LaplacianSet& lap, const StdgrConfig& cfg,
                const TuckerFactors& init, const IterationCallback& on_iteration = {});

}  // namespace stdgr
