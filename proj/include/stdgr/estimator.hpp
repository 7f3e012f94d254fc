#pragma once

// End-to-end STDGR fit: NNM initial estimate -> rank selection -> HOSVD ->
// Laplacians from the HOSVD factors -> PALM.

#include <optional>
#include <string>
#include <vector>

#include "stdgr/init_pipeline.hpp"
#include "stdgr/palm.hpp"

namespace stdgr {

struct PipelineConfig {
  StdgrConfig stdgr;
  NnmConfig nnm;
  double epsilon = 0.2;
  std::optional<double> c_bar;  // default_ridge_constant when empty
};

struct PipelineResult {
  FitResult fit;
  NnmResult nnm;
  RankTriple ranks;
  bool ranks_selected = false;
  double c_bar = 0.0;
  TuckerFactors init;
  LaplacianSet laplacians;
};

PipelineResult fit_pipeline(const DesignPair& d, const PipelineConfig& cfg,
                            const IterationCallback& on_iteration = {});

}  // namespace stdgr
