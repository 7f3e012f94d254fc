#pragma once

// Everything the PALM solver needs before iterating: the nuclear-norm
// initial estimator, truncated HOSVD, ridge-ratio rank selection and the
// Gaussian-kernel graph Laplacians built from factor rows.

#include <vector>

#include "stdgr/tensor.hpp"
#include "stdgr/var_model.hpp"

namespace stdgr {

struct NnmConfig {
  double lambda = 0.0;  // <= 0 selects default_nnm_lambda
  Index max_iter = 5000;
  double tol = 1e-6;
};

// sqrt(log(m^2 p) / T)
double default_nnm_lambda(Index m, Index p, Index samples);

struct NnmResult {
  TransitionTensor w;
  double lambda = 0.0;
  std::vector<double> objective_trace;  // starts at W = 0
  Index iterations = 0;
  bool converged = false;
};

// (1/T) sum_t ||y_t - W_(1) x_t||^2 + lambda ||W_(1)||_*
double nnm_objective(const Matrix& w1, const DesignPair& d, double lambda);

// Proximal gradient from W = 0 with step 1/Lq, Lq = 2 lambda_max(X^T X) / T.
NnmResult nnm_estimate(const DesignPair& d, const NnmConfig& cfg);

struct RankTriple {
  Index r1 = 1;
  Index r2 = 1;
  Index r3 = 1;

  Index operator[](int mode) const;
  bool operator==(const RankTriple&) const = default;
};

// Throws UsageError unless 1 <= r1, r2 <= m and 1 <= r3 <= p.
void validate_ranks(const RankTriple& r, Index m, Index p);

TuckerFactors hosvd(const TransitionTensor& w, const RankTriple& ranks);

// sqrt(m p log(T) / (50 T))
double default_ridge_constant(Index m, Index p, Index samples);

// argmin_{1 <= j <= n-1} (s_{j+1} + c) / (s_j + c), smallest j on ties.
// `singular` is zero-padded to n entries.
Index ridge_ratio_rank(const Vector& singular, Index n, double c_bar);

RankTriple select_ranks(const TransitionTensor& w_init, double c_bar);

struct LaplacianSet {
  Matrix l1;  // m x m
  Matrix l2;  // m x m
  Matrix l3;  // p x p
  double epsilon = 0.2;

  const Matrix& operator[](int mode) const;
};

// z_lt = exp(-||row_l - row_t||^2 / (2 eps^2)), self-weights included.
Matrix gaussian_weights(const Matrix& rows, double epsilon);
// L = D - Z
Matrix graph_laplacian(const Matrix& weights);

LaplacianSet build_laplacians(const TuckerFactors& f, double epsilon = 0.2);

}  // namespace stdgr
