#pragma once

// VAR(p) data layer: y_t = W_1 y_{t-1} + ... + W_p y_{t-p} + e_t, with the
// lag matrices stored as frontal slices of an m x m x p transition tensor.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stdgr/tensor.hpp"

namespace stdgr {

// m-variate series; row t of `values` is y_t.
struct SeriesPanel {
  std::vector<std::string> names;
  Matrix values;

  Index m() const { return values.cols(); }
  Index length() const { return values.rows(); }

  static SeriesPanel from_values(Matrix values);  // default names y1..ym
  SeriesPanel rows(Index begin, Index count) const;
};

class TransitionTensor {
 public:
  TransitionTensor() = default;
  explicit TransitionTensor(Tensor3 w);
  static TransitionTensor from_lags(const std::vector<Matrix>& lags);

  const Tensor3& tensor() const { return w_; }
  Index m() const { return w_.dims().n1; }
  Index p() const { return w_.dims().n3; }
  Matrix lag(Index i) const { return w_.slice(i - 1); }  // W_i, i in 1..p
  Matrix unfolded() const;                                 // W_(1), m x mp

 private:
  Tensor3 w_;
};

// Row t of x is x_t^T = (y_{t-1}^T, ..., y_{t-p}^T); row t of y is y_t^T.
struct DesignPair {
  Matrix x;  // T x mp
  Matrix y;  // T x m
  Index p = 0;

  Index samples() const { return y.rows(); }
  Index m() const { return y.cols(); }
};

// Uses observations [0, length) of the panel; the first p rows only supply lags.
DesignPair build_design(const SeriesPanel& panel, Index p);

// Lag vector (y_{t-1}, ..., y_{t-p}) for predicting row t of the panel.
Vector lag_vector(const Matrix& values, Index t, Index p);

Vector predict_one_step(const TransitionTensor& w, const Vector& lags);

// mp x mp companion matrix of (W_1, ..., W_p).
Matrix companion_matrix(const TransitionTensor& w);
double spectral_radius(const TransitionTensor& w);
// True iff the companion spectral radius is <= 1 - margin.
bool is_stable(const TransitionTensor& w, double margin = 1e-8);

struct NoiseSpec {
  Matrix covariance;  // m x m, symmetric PSD
  std::uint64_t seed = 0;
};

struct SimulationOptions {
  Index burn_in = 500;
  // p x m; row i - 1 holds y_{-i}. Zero lags when absent.
  std::optional<Matrix> initial_lags;
};

// Returns `length` observations after discarding `burn_in` leading samples.
SeriesPanel simulate(const TransitionTensor& w, const NoiseSpec& noise, Index length,
                     const SimulationOptions& options = {});

// (1 / (m T0)) sum_t ||truth_t - pred_t||^2
double mse(const Matrix& truth, const Matrix& pred);
double mse(const SeriesPanel& truth, const SeriesPanel& pred);

// Per-variable affine map fitted on a leading block of rows.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& values, Index rows);
  static Standardizer identity(Index m);
  Matrix apply(const Matrix& values) const;
  Matrix invert(const Matrix& standardized) const;
};

}  // namespace stdgr
