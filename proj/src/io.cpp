#include "stdgr/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "stdgr/error.hpp"

namespace stdgr::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

SeriesPanel parse_panel_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  SeriesPanel panel;
  std::vector<std::vector<double>> rows;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split_commas(view);
    if (!have_header) {
      for (const auto f : fields) {
        if (f.empty()) throw DataFormatError("line 1: empty variable name in header");
        double probe;
        const auto res = std::from_chars(f.data(), f.data() + f.size(), probe);
        if (res.ec == std::errc() && res.ptr == f.data() + f.size()) {
          throw DataFormatError("line " + std::to_string(line_no) +
                                ": header row required (found numeric field '" +
                                std::string(f) + "')");
        }
        panel.names.emplace_back(f);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != panel.names.size()) {
      throw DataFormatError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(panel.names.size()) + " fields, found " +
                            std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const auto f = fields[j];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), row[j]);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(row[j])) {
        throw DataFormatError("line " + std::to_string(line_no) + ", column " +
                              std::to_string(j + 1) + ": '" + std::string(f) +
                              "' is not a finite decimal number");
      }
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw DataFormatError("empty CSV: header row required");
  panel.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(panel.names.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t j = 0; j < rows[t].size(); ++j) {
      panel.values(static_cast<Index>(t), static_cast<Index>(j)) = rows[t][j];
    }
  }
  return panel;
}

SeriesPanel read_panel_csv(const std::filesystem::path& path) {
  return parse_panel_csv(read_file(path));
}

std::string format_panel_csv(const SeriesPanel& panel) {
  std::string out;
  for (std::size_t j = 0; j < panel.names.size(); ++j) {
    if (j) out += ',';
    out += panel.names[j];
  }
  out += '\n';
  for (Index t = 0; t < panel.length(); ++t) {
    for (Index j = 0; j < panel.m(); ++j) {
      if (j) out += ',';
      out += format_double(panel.values(t, j));
    }
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw UsageError("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json to_json(const Matrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"values", std::vector<double>(m.data(), m.data() + m.size())}};
}

json to_json(const Tensor3& t) {
  const Dims& d = t.dims();
  return {{"dims", {d.n1, d.n2, d.n3}},
          {"values", std::vector<double>(t.values().begin(), t.values().end())}};
}

Matrix matrix_from_json(const json& j) {
  try {
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    const auto values = j.at("values").get<std::vector<double>>();
    if (static_cast<Index>(values.size()) != rows * cols) {
      throw DataFormatError("matrix value count does not match rows x cols");
    }
    return Eigen::Map<const Matrix>(values.data(), rows, cols);
  } catch (const json::exception& e) {
    throw DataFormatError(std::string("malformed matrix: ") + e.what());
  }
}

Tensor3 tensor_from_json(const json& j) {
  try {
    const auto d = j.at("dims").get<std::vector<Index>>();
    if (d.size() != 3) throw DataFormatError("tensor dims must have 3 entries");
    return Tensor3({d[0], d[1], d[2]}, j.at("values").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw DataFormatError(std::string("malformed tensor: ") + e.what());
  } catch (const UsageError& e) {
    throw DataFormatError(std::string("malformed tensor: ") + e.what());
  }
}

json to_json(const StdgrConfig& cfg) {
  json j = {{"beta", cfg.beta},     {"alpha", cfg.alpha}, {"gamma", cfg.gamma},
            {"c", cfg.c},           {"abar1", cfg.a_bar1}, {"abar2", cfg.a_bar2},
            {"tol", cfg.tol},       {"max_iter", cfg.max_iter}};
  if (cfg.ranks) {
    j["ranks"] = {cfg.ranks->r1, cfg.ranks->r2, cfg.ranks->r3};
  } else {
    j["ranks"] = "auto";
  }
  return j;
}

StdgrConfig stdgr_config_from_json(const json& j) {
  static const std::set<std::string> known = {"beta", "alpha", "gamma", "c", "abar1",
                                              "abar2", "tol", "max_iter", "ranks"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw ConfigError("unknown solver config key '" + item.key() + "'");
  }
  StdgrConfig c;
  c.beta = j.at("beta").get<double>();
  c.alpha = j.at("alpha").get<std::array<double, 3>>();
  c.gamma = j.at("gamma").get<std::array<double, 3>>();
  c.c = j.at("c").get<double>();
  c.a_bar1 = j.at("abar1").get<double>();
  c.a_bar2 = j.at("abar2").get<double>();
  c.tol = j.at("tol").get<double>();
  c.max_iter = j.at("max_iter").get<Index>();
  if (j.at("ranks").is_array()) {
    const auto r = j.at("ranks").get<std::array<Index, 3>>();
    c.ranks = RankTriple{r[0], r[1], r[2]};
  }
  return c;
}

json model_to_json(const ModelFile& m) {
  json j;
  j["format"] = "stdgr-model";
  j["version"] = 1;
  j["variables"] = m.variables;
  j["m"] = m.factors.a1.rows();
  j["p"] = m.p;
  j["ranks"] = {m.ranks.r1, m.ranks.r2, m.ranks.r3};
  j["ranks_selected"] = m.ranks_selected;
  j["core"] = to_json(m.factors.core);
  j["a1"] = to_json(m.factors.a1);
  j["a2"] = to_json(m.factors.a2);
  j["a3"] = to_json(m.factors.a3);
  j["u1"] = to_json(m.u[0]);
  j["u2"] = to_json(m.u[1]);
  j["u3"] = to_json(m.u[2]);
  j["laplacians"] = {{"epsilon", m.laplacians.epsilon},
                     {"l1", to_json(m.laplacians.l1)},
                     {"l2", to_json(m.laplacians.l2)},
                     {"l3", to_json(m.laplacians.l3)}};
  j["w"] = to_json(m.w);
  j["config"] = {{"stdgr", to_json(m.config.stdgr)},
                 {"nnm", {{"lambda", m.config.nnm.lambda},
                          {"max_iter", m.config.nnm.max_iter},
                          {"tol", m.config.nnm.tol}}},
                 {"epsilon", m.config.epsilon}};
  j["c_bar"] = m.c_bar;
  j["nnm_lambda"] = m.nnm_lambda;
  j["objective_trace"] = m.objective_trace;
  j["iterations"] = m.iterations;
  j["converged"] = m.converged;
  j["train_rows"] = m.train_rows;
  if (m.standardizer) {
    j["standardizer"] = {
        {"mean", std::vector<double>(m.standardizer->mean.data(),
                                     m.standardizer->mean.data() + m.standardizer->mean.size())},
        {"scale", std::vector<double>(m.standardizer->scale.data(),
                                      m.standardizer->scale.data() + m.standardizer->scale.size())}};
  } else {
    j["standardizer"] = nullptr;
  }
  return j;
}

ModelFile model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "stdgr-model") {
      throw DataFormatError("not a stdgr model file");
    }
    ModelFile m;
    m.variables = j.at("variables").get<std::vector<std::string>>();
    m.p = j.at("p").get<Index>();
    const auto r = j.at("ranks").get<std::array<Index, 3>>();
    m.ranks = {r[0], r[1], r[2]};
    m.ranks_selected = j.at("ranks_selected").get<bool>();
    m.factors.core = tensor_from_json(j.at("core"));
    m.factors.a1 = matrix_from_json(j.at("a1"));
    m.factors.a2 = matrix_from_json(j.at("a2"));
    m.factors.a3 = matrix_from_json(j.at("a3"));
    m.u = {matrix_from_json(j.at("u1")), matrix_from_json(j.at("u2")), matrix_from_json(j.at("u3"))};
    const json& lap = j.at("laplacians");
    m.laplacians.epsilon = lap.at("epsilon").get<double>();
    m.laplacians.l1 = matrix_from_json(lap.at("l1"));
    m.laplacians.l2 = matrix_from_json(lap.at("l2"));
    m.laplacians.l3 = matrix_from_json(lap.at("l3"));
    m.w = tensor_from_json(j.at("w"));
    const json& cfg = j.at("config");
    m.config.stdgr = stdgr_config_from_json(cfg.at("stdgr"));
    m.config.nnm.lambda = cfg.at("nnm").at("lambda").get<double>();
    m.config.nnm.max_iter = cfg.at("nnm").at("max_iter").get<Index>();
    m.config.nnm.tol = cfg.at("nnm").at("tol").get<double>();
    m.config.epsilon = cfg.at("epsilon").get<double>();
    m.c_bar = j.at("c_bar").get<double>();
    m.nnm_lambda = j.at("nnm_lambda").get<double>();
    m.objective_trace = j.at("objective_trace").get<std::vector<double>>();
    m.iterations = j.at("iterations").get<Index>();
    m.converged = j.at("converged").get<bool>();
    m.train_rows = j.at("train_rows").get<Index>();
    if (!j.at("standardizer").is_null()) {
      const auto mean = j["standardizer"].at("mean").get<std::vector<double>>();
      const auto scale = j["standardizer"].at("scale").get<std::vector<double>>();
      m.standardizer = Standardizer{Eigen::Map<const Vector>(mean.data(), static_cast<Index>(mean.size())),
                                    Eigen::Map<const Vector>(scale.data(), static_cast<Index>(scale.size()))};
    }
    const Dims wd = m.w.dims();
    if (wd.n1 != wd.n2 || wd.n3 != m.p || static_cast<Index>(m.variables.size()) != wd.n1) {
      throw DataFormatError("model dimensions are inconsistent");
    }
    return m;
  } catch (const json::exception& e) {
    throw DataFormatError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ModelFile& m) {
  write_file_atomic(path, model_to_json(m).dump(1) + "\n");
}

ModelFile load_model(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw DataFormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

json truth_to_json(const TuckerFactors& f, const TransitionTensor& w, Index rescalings) {
  return {{"format", "stdgr-truth"},
          {"core", to_json(f.core)},
          {"a1", to_json(f.a1)},
          {"a2", to_json(f.a2)},
          {"a3", to_json(f.a3)},
          {"w", to_json(w.tensor())},
          {"rescalings", rescalings}};
}

std::string diagnostics_line(const IterationRecord& rec) {
  json j = {{"k", rec.k}, {"F", rec.objective}, {"lambda", rec.lambda}};
  return j.dump() + "\n";
}

}  // namespace stdgr::io
