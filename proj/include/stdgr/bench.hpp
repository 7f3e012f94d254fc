#pragma once

// Synthetic experiment harness: Tucker-structured ground truth, estimation
// error curves against T and the theoretical scale Upsilon, and held-out
// one-step forecast evaluation.

#include <cstdint>
#include <string>
#include <vector>

#include "stdgr/estimator.hpp"
#include "stdgr/var_model.hpp"

namespace stdgr {

enum class FactorStyle { gaussian_svd, laplacian_eigenvectors };

FactorStyle parse_factor_style(const std::string& s);
std::string to_string(FactorStyle s);

struct ScenarioSpec {
  Index m = 10;
  Index p = 2;
  RankTriple ranks{2, 2, 2};
  std::vector<double> superdiag{2.0, 2.0};  // G_iii, i < min(r1, r2, r3)
  FactorStyle factor_style = FactorStyle::gaussian_svd;
  double noise_scale = 1.0;  // Sigma = noise_scale^2 I
  std::vector<std::uint64_t> seeds{1};
  std::vector<Index> sample_sizes{200};
  Index burn_in = 500;
  // > 0: initial lags drawn as init_scale * N(0, 1), so noise-free runs
  // still produce a non-trivial trajectory.
  double init_scale = 0.0;

  void validate() const;
};

struct Scenario {
  TransitionTensor w;
  TuckerFactors truth;
  Index rescalings = 0;  // times the superdiagonal was shrunk by 0.9
  Index nonzeros = 0;    // s, nonzero core entries
};

// Throws UnstableModelError if 50 rescalings do not reach stability.
Scenario make_scenario(const ScenarioSpec& spec, std::uint64_t seed);

// Noise stream used for every sample size of a seed.
std::uint64_t noise_seed(std::uint64_t scenario_seed);

SeriesPanel simulate_scenario(const ScenarioSpec& spec, const Scenario& sc, std::uint64_t seed,
                              Index samples);

// (sqrt(s) + sqrt(s)) sqrt(log(m^2 p) / T)
double upsilon(Index s, Index m, Index p, Index samples);

struct ErrorCurveRow {
  std::string method;  // "STDGR" or "NNM"
  Index samples = 0;
  double upsilon = 0.0;
  double mean_error = 0.0;
  double std_error = 0.0;
  std::vector<double> errors;  // per seed, in seed order
};

std::vector<ErrorCurveRow> error_curve(const ScenarioSpec& spec, const PipelineConfig& cfg);

// Header "method,T,upsilon,mean_error,stderr".
std::string curve_csv(const std::vector<ErrorCurveRow>& rows);

struct ForecastReport {
  double mse = 0.0;
  Index train_rows = 0;
  Index test_rows = 0;
  RankTriple ranks;
  Matrix predictions;  // test_rows x m, original scale
};

// Fits on the leading floor(train_fraction * length) rows and predicts each
// held-out row from the true lags.
ForecastReport rolling_eval(const SeriesPanel& panel, double train_fraction, Index p,
                            const PipelineConfig& cfg, bool standardize = false);

// One-step predictions of rows [begin, length) from the true lags.
Matrix one_step_predictions(const TransitionTensor& w, const Matrix& values, Index begin);

}  // namespace stdgr
