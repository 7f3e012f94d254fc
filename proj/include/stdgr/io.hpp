#pragma once

// File formats: CSV panels (header of variable names, one row per time
// step) and JSON model containers whose arrays are flattened in the
// i1-fastest / column-major order used in memory. Doubles are written in
// shortest round-trip form, so save/load is bit-exact.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stdgr/estimator.hpp"
#include "stdgr/var_model.hpp"

namespace stdgr::io {

using nlohmann::json;

// Throws DataFormatError naming the offending line.
SeriesPanel parse_panel_csv(const std::string& text);
SeriesPanel read_panel_csv(const std::filesystem::path& path);
std::string format_panel_csv(const SeriesPanel& panel);
std::string format_double(double v);

// Write to a sibling temporary, then rename over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

json to_json(const Matrix& m);
json to_json(const Tensor3& t);
Matrix matrix_from_json(const json& j);
Tensor3 tensor_from_json(const json& j);

json to_json(const StdgrConfig& cfg);
StdgrConfig stdgr_config_from_json(const json& j);

struct ModelFile {
  std::vector<std::string> variables;
  Index p = 0;
  RankTriple ranks;
  bool ranks_selected = false;
  TuckerFactors factors;
  std::array<Matrix, 3> u;
  LaplacianSet laplacians;
  Tensor3 w;
  PipelineConfig config;
  double c_bar = 0.0;
  double nnm_lambda = 0.0;
  std::vector<double> objective_trace;
  Index iterations = 0;
  bool converged = false;
  Index train_rows = 0;
  std::optional<Standardizer> standardizer;

  TransitionTensor transition() const { return TransitionTensor(w); }
};

json model_to_json(const ModelFile& m);
ModelFile model_from_json(const json& j);
void save_model(const std::filesystem::path& path, const ModelFile& m);
ModelFile load_model(const std::filesystem::path& path);

// Sidecar written next to simulated panels.
json truth_to_json(const TuckerFactors& f, const TransitionTensor& w, Index rescalings);

// One JSON object per line: {"k":..,"F":..,"lambda":[7 values]}.
std::string diagnostics_line(const IterationRecord& rec);

}  // namespace stdgr::io
