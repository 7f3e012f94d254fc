// stdgr: fit, simulate and evaluate Tucker-structured VAR models.
//
// Exit codes: 0 success (fit converged), 2 fit stopped at max-iter,
// 64 usage or configuration error, 65 malformed input data, 1 anything else.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "stdgr/bench.hpp"
#include "stdgr/error.hpp"
#include "stdgr/estimator.hpp"
#include "stdgr/io.hpp"
#include "stdgr/kernels.hpp"
#include "stdgr/random.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stdgr;

namespace {

constexpr int kExitMaxIter = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;

struct Options {
  std::optional<std::string> input, output, config, model, pred, diagnostics;
  std::optional<std::string> ranks, alpha, gamma, superdiag, factor_style, seeds, sample_sizes;
  std::optional<double> beta, c, abar1, abar2, tol, lambda_nn, epsilon, train_fraction;
  std::optional<double> noise_scale, init_scale, c_bar;
  std::optional<long long> p, max_iter, seed, horizon, m, length, burn_in;
  std::optional<bool> standardize;
};

// Binds a flag and remembers its config-file key.
class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {}

  template <class T>
  Flags& add(const std::string& name, std::optional<T>& slot, const std::string& help) {
    app_->add_option("--" + name, slot, help);
    setters_[name] = [&slot, name](const json& v) {
      if (slot) return;  // command line wins
      try {
        if constexpr (std::is_same_v<T, std::string>) {
          slot = list_to_string(v);
        } else {
          slot = v.get<T>();
        }
      } catch (const json::exception&) {
        throw ConfigError("config key '" + name + "' has the wrong type");
      }
    };
    return *this;
  }

  Flags& flag(const std::string& name, std::optional<bool>& slot, const std::string& help) {
    app_->add_flag_function("--" + name, [&slot](std::int64_t) { slot = true; }, help);
    setters_[name] = [&slot, name](const json& v) {
      if (slot) return;
      if (!v.is_boolean()) throw ConfigError("config key '" + name + "' must be a boolean");
      slot = v.get<bool>();
    };
    return *this;
  }

  void apply_config(const fs::path& path) const {
    json j;
    try {
      j = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
      throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      const auto it = setters_.find(key);
      if (it == setters_.end()) throw ConfigError("unknown config key '" + key + "'");
      it->second(value);
    }
  }

 private:
  static std::string list_to_string(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    if (v.is_array()) {
      std::string s;
      for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError("list entries must be numbers");
        if (!s.empty()) s += ',';
        s += e.dump();
      }
      return s;
    }
    throw ConfigError("expected a string, number or list");
  }

  CLI::App* app_;
  std::map<std::string, std::function<void(const json&)>> setters_;
};

std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !std::isfinite(v)) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("--" + what + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError("--" + what + " is empty");
  return out;
}

std::vector<long long> parse_ints(const std::string& s, const std::string& what) {
  std::vector<long long> out;
  for (double v : parse_doubles(s, what)) {
    if (v != std::floor(v)) throw UsageError("--" + what + " expects integers");
    out.push_back(static_cast<long long>(v));
  }
  return out;
}

std::array<double, 3> triple(const std::string& s, const std::string& what) {
  const auto v = parse_doubles(s, what);
  if (v.size() == 1) return {v[0], v[0], v[0]};
  if (v.size() == 3) return {v[0], v[1], v[2]};
  throw UsageError("--" + what + " expects one value or three comma-separated values");
}

std::optional<RankTriple> parse_ranks(const std::optional<std::string>& s) {
  if (!s || *s == "auto") return std::nullopt;
  const auto v = parse_ints(*s, "ranks");
  if (v.size() != 3) throw UsageError("--ranks expects auto or r1,r2,r3");
  return RankTriple{v[0], v[1], v[2]};
}

template <class T>
T need(const std::optional<T>& v, const std::string& name) {
  if (!v) throw UsageError("--" + name + " is required");
  return *v;
}

PipelineConfig pipeline_config(const Options& o) {
  PipelineConfig cfg;
  StdgrConfig& s = cfg.stdgr;
  if (o.beta) s.beta = *o.beta;
  if (o.alpha) s.alpha = triple(*o.alpha, "alpha");
  if (o.gamma) s.gamma = triple(*o.gamma, "gamma");
  if (o.c) s.c = *o.c;
  if (o.abar1) s.a_bar1 = *o.abar1;
  if (o.abar2) s.a_bar2 = *o.abar2;
  if (o.tol) s.tol = *o.tol;
  if (o.max_iter) s.max_iter = *o.max_iter;
  s.ranks = parse_ranks(o.ranks);
  if (o.lambda_nn) {
    if (!(*o.lambda_nn > 0.0)) throw ConfigError("--lambda-nn must be positive");
    cfg.nnm.lambda = *o.lambda_nn;
  }
  if (o.epsilon) {
    if (!(*o.epsilon > 0.0)) throw ConfigError("--epsilon must be positive");
    cfg.epsilon = *o.epsilon;
  }
  if (o.c_bar) {
    if (!(*o.c_bar > 0.0)) throw ConfigError("--c-bar must be positive");
    cfg.c_bar = *o.c_bar;
  }
  s.validate();
  return cfg;
}

Index lag_order(const Options& o) {
  const long long p = o.p.value_or(1);
  if (p < 1) throw UsageError("--p must be at least 1");
  return p;
}

double train_fraction(const Options& o, double fallback) {
  const double f = o.train_fraction.value_or(fallback);
  if (!(f > 0.0 && f <= 1.0)) throw UsageError("--train-fraction must lie in (0, 1]");
  return f;
}

ScenarioSpec scenario(const Options& o) {
  ScenarioSpec spec;
  spec.m = o.m.value_or(10);
  spec.p = lag_order(o);
  if (const auto r = parse_ranks(o.ranks)) spec.ranks = *r;
  const Index rmin = std::min({spec.ranks.r1, spec.ranks.r2, spec.ranks.r3});
  spec.superdiag = o.superdiag ? parse_doubles(*o.superdiag, "superdiag")
                               : std::vector<double>(static_cast<std::size_t>(rmin), 2.0);
  if (o.factor_style) spec.factor_style = parse_factor_style(*o.factor_style);
  spec.noise_scale = o.noise_scale.value_or(1.0);
  spec.burn_in = o.burn_in.value_or(500);
  spec.init_scale = o.init_scale.value_or(0.0);
  spec.seeds.clear();
  if (o.seeds) {
    for (long long s : parse_ints(*o.seeds, "seeds")) spec.seeds.push_back(static_cast<std::uint64_t>(s));
  } else {
    spec.seeds.push_back(static_cast<std::uint64_t>(o.seed.value_or(1)));
  }
  spec.sample_sizes.clear();
  if (o.sample_sizes) {
    for (long long t : parse_ints(*o.sample_sizes, "sample-sizes")) spec.sample_sizes.push_back(t);
  }
  spec.validate();
  return spec;
}

void emit(const std::optional<std::string>& path, const std::string& text) {
  if (path) {
    io::write_file_atomic(*path, text);
  } else {
    std::cout << text;
  }
}

int cmd_simulate(const Options& o) {
  const ScenarioSpec spec = scenario(o);
  const std::string out = need(o.output, "output");
  const long long length = o.length.value_or(200);
  if (length < 1) throw UsageError("--length must be positive");
  const std::uint64_t seed = spec.seeds.front();
  const Scenario sc = make_scenario(spec, seed);
  const SeriesPanel panel = simulate_scenario(spec, sc, seed, length - spec.p);
  io::write_file_atomic(out, io::format_panel_csv(panel));
  json truth = io::truth_to_json(sc.truth, sc.w, sc.rescalings);
  truth["seed"] = seed;
  truth["prng"] = std::string(Rng::algorithm);
  truth["noise_scale"] = spec.noise_scale;
  truth["factor_style"] = to_string(spec.factor_style);
  io::write_file_atomic(out + ".truth.json", truth.dump(1) + "\n");
  return 0;
}

struct PreparedPanel {
  SeriesPanel panel;
  Index train_rows = 0;
  std::optional<Standardizer> standardizer;
  Matrix scaled;
};

PreparedPanel prepare(const Options& o, Index p, double default_fraction) {
  PreparedPanel pp;
  pp.panel = io::read_panel_csv(need(o.input, "input"));
  const double frac = train_fraction(o, default_fraction);
  pp.train_rows = frac >= 1.0 ? pp.panel.length()
                              : static_cast<Index>(std::floor(frac * static_cast<double>(pp.panel.length())));
  if (pp.train_rows < p + 2) {
    throw DataFormatError("panel has " + std::to_string(pp.train_rows) + " training rows; at least p+2 = " +
                          std::to_string(p + 2) + " are needed");
  }
  if (o.standardize.value_or(false)) pp.standardizer = Standardizer::fit(pp.panel.values, pp.train_rows);
  pp.scaled = pp.standardizer ? pp.standardizer->apply(pp.panel.values) : pp.panel.values;
  return pp;
}

int cmd_fit(const Options& o) {
  const Index p = lag_order(o);
  const PipelineConfig cfg = pipeline_config(o);
  const std::string out = need(o.output, "output");
  const PreparedPanel pp = prepare(o, p, 1.0);
  const DesignPair d = build_design(SeriesPanel{pp.panel.names, pp.scaled.topRows(pp.train_rows)}, p);

  const std::string diag_path = o.diagnostics.value_or(out + ".diagnostics.jsonl");
  std::string diag;
  const PipelineResult res = fit_pipeline(d, cfg, [&diag](const IterationRecord& rec) {
    diag += io::diagnostics_line(rec);
  });
  json setup = {{"setup",
                 {{"ranks", {res.ranks.r1, res.ranks.r2, res.ranks.r3}},
                  {"ranks_selected", res.ranks_selected},
                  {"c_bar", res.c_bar},
                  {"nnm_lambda", res.nnm.lambda},
                  {"nnm_iterations", res.nnm.iterations},
                  {"train_rows", pp.train_rows},
                  {"F0", res.fit.objective_trace.front()},
                  {"rho_bar", res.fit.rho_bar},
                  {"kernels", std::string(kernels::name(kernels::active().isa))},
                  {"notes", res.fit.notes}}}};
  json done = {{"done", {{"iterations", res.fit.iterations}, {"converged", res.fit.converged}}}};
  io::write_file_atomic(diag_path, setup.dump() + "\n" + diag + done.dump() + "\n");

  io::ModelFile mf;
  mf.variables = pp.panel.names;
  mf.p = p;
  mf.ranks = res.ranks;
  mf.ranks_selected = res.ranks_selected;
  mf.factors = res.fit.factors;
  mf.u = res.fit.u;
  mf.laplacians = res.laplacians;
  mf.w = res.fit.w_hat.tensor();
  mf.config = cfg;
  mf.c_bar = res.c_bar;
  mf.nnm_lambda = res.nnm.lambda;
  mf.objective_trace = res.fit.objective_trace;
  mf.iterations = res.fit.iterations;
  mf.converged = res.fit.converged;
  mf.train_rows = pp.train_rows;
  mf.standardizer = pp.standardizer;
  io::save_model(out, mf);
  std::cerr << "ranks " << res.ranks.r1 << ',' << res.ranks.r2 << ',' << res.ranks.r3 << ", "
            << res.fit.iterations << " iterations, "
            << (res.fit.converged ? "converged" : "stopped at max-iter") << '\n';
  return res.fit.converged ? 0 : kExitMaxIter;
}

void check_dims(const io::ModelFile& mf, const SeriesPanel& panel) {
  if (static_cast<std::size_t>(panel.m()) != mf.variables.size()) {
    throw UsageError("panel has " + std::to_string(panel.m()) + " variables, model expects " +
                     std::to_string(mf.variables.size()));
  }
}

int cmd_forecast(const Options& o) {
  const io::ModelFile mf = io::load_model(need(o.model, "model"));
  const SeriesPanel panel = io::read_panel_csv(need(o.input, "input"));
  check_dims(mf, panel);
  const long long h = o.horizon.value_or(1);
  if (h < 1) throw UsageError("--horizon must be at least 1");
  if (panel.length() < mf.p) throw UsageError("panel needs at least p rows of history");

  const Matrix scaled = mf.standardizer ? mf.standardizer->apply(panel.values) : panel.values;
  const TransitionTensor w = mf.transition();
  Matrix hist(mf.p + h, panel.m());
  hist.topRows(mf.p) = scaled.bottomRows(mf.p);
  for (Index s = 0; s < h; ++s) {
    hist.row(mf.p + s) = predict_one_step(w, lag_vector(hist, mf.p + s, mf.p)).transpose();
  }
  Matrix fc = hist.bottomRows(h);
  if (mf.standardizer) fc = mf.standardizer->invert(fc);
  emit(o.output, io::format_panel_csv(SeriesPanel{panel.names, fc}));
  return 0;
}

int cmd_eval(const Options& o) {
  json report;
  if (o.pred) {
    const SeriesPanel truth = io::read_panel_csv(need(o.input, "input"));
    const SeriesPanel pred = io::read_panel_csv(*o.pred);
    if (truth.m() != pred.m() || truth.length() != pred.length()) {
      throw UsageError("truth and prediction panels differ in shape");
    }
    report = {{"mse", mse(truth, pred)}, {"rows", truth.length()}};
  } else {
    const io::ModelFile mf = io::load_model(need(o.model, "model"));
    const SeriesPanel panel = io::read_panel_csv(need(o.input, "input"));
    check_dims(mf, panel);
    Index begin = mf.train_rows;
    if (o.train_fraction) {
      begin = static_cast<Index>(std::floor(train_fraction(o, 1.0) * static_cast<double>(panel.length())));
    }
    begin = std::max<Index>(begin, mf.p);
    if (begin >= panel.length()) throw UsageError("no held-out rows to evaluate");
    const Matrix scaled = mf.standardizer ? mf.standardizer->apply(panel.values) : panel.values;
    Matrix pred = one_step_predictions(mf.transition(), scaled, begin);
    if (mf.standardizer) pred = mf.standardizer->invert(pred);
    const Matrix truth = panel.values.bottomRows(panel.length() - begin);
    report = {{"mse", mse(truth, pred)}, {"rows", truth.rows()}, {"first_row", begin}};
    if (o.output) io::write_file_atomic(*o.output, io::format_panel_csv(SeriesPanel{panel.names, pred}));
  }
  std::cout << report.dump() << '\n';
  return 0;
}

int cmd_rank_select(const Options& o) {
  const Index p = lag_order(o);
  const PipelineConfig cfg = pipeline_config(o);
  const PreparedPanel pp = prepare(o, p, 1.0);
  const DesignPair d = build_design(SeriesPanel{pp.panel.names, pp.scaled.topRows(pp.train_rows)}, p);
  const NnmResult nnm = nnm_estimate(d, cfg.nnm);
  const double c_bar = cfg.c_bar.value_or(default_ridge_constant(d.m(), p, d.samples()));
  const RankTriple r = select_ranks(nnm.w, c_bar);
  json report = {{"ranks", {r.r1, r.r2, r.r3}}, {"c_bar", c_bar}, {"nnm_lambda", nnm.lambda}};
  std::cout << report.dump() << '\n';
  return 0;
}

int cmd_bench(const Options& o) {
  const ScenarioSpec spec = scenario(o);
  if (spec.sample_sizes.empty()) throw UsageError("--sample-sizes is required");
  const PipelineConfig cfg = pipeline_config(o);
  emit(o.output, curve_csv(error_curve(spec, cfg)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Tucker VAR estimation with graph regularization"};
  app.require_subcommand(1);
  Options o;

  struct Command {
    CLI::App* app;
    std::unique_ptr<Flags> flags;
    std::function<int(const Options&)> run;
  };
  std::vector<Command> commands;
  auto make = [&](const std::string& name, const std::string& help, std::function<int(const Options&)> run) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "JSON file of flag values; flags given here take precedence");
    commands.push_back({sub, std::make_unique<Flags>(sub), std::move(run)});
    return commands.back().flags.get();
  };
  auto solver_flags = [&](Flags* f) {
    f->add("p", o.p, "lag order")
        .add("ranks", o.ranks, "auto or r1,r2,r3")
        .add("beta", o.beta, "l1 weight on the core")
        .add("alpha", o.alpha, "graph weight(s), one value or three")
        .add("gamma", o.gamma, "coupling weight(s), one value or three")
        .add("c", o.c, "core box bound")
        .add("abar1", o.abar1, "step multiplier for G, A1..A3")
        .add("abar2", o.abar2, "step multiplier for U1..U3")
        .add("tol", o.tol, "stopping tolerance on relative block changes")
        .add("max-iter", o.max_iter, "iteration cap")
        .add("lambda-nn", o.lambda_nn, "nuclear-norm weight of the initial estimate")
        .add("epsilon", o.epsilon, "Gaussian kernel width of the Laplacians")
        .add("c-bar", o.c_bar, "ridge constant of the rank selector");
  };
  auto scenario_flags = [&](Flags* f) {
    f->add("m", o.m, "number of variables")
        .add("superdiag", o.superdiag, "core superdiagonal, comma-separated")
        .add("factor-style", o.factor_style, "gaussian-svd or laplacian-eigenvectors")
        .add("noise-scale", o.noise_scale, "noise standard deviation")
        .add("burn-in", o.burn_in, "discarded leading samples")
        .add("init-scale", o.init_scale, "scale of random initial lags (0: zero lags)");
  };

  Flags* f = make("simulate", "simulate a panel from a random Tucker-structured VAR", cmd_simulate);
  scenario_flags(f);
  f->add("p", o.p, "lag order")
      .add("ranks", o.ranks, "r1,r2,r3")
      .add("length", o.length, "rows in the output panel")
      .add("seed", o.seed, "scenario and noise seed")
      .add("output", o.output, "panel CSV; ground truth goes to <output>.truth.json");

  f = make("fit", "fit a model to a CSV panel", cmd_fit);
  solver_flags(f);
  f->add("input", o.input, "panel CSV")
      .add("output", o.output, "model JSON")
      .add("diagnostics", o.diagnostics, "per-iteration JSON lines (default <output>.diagnostics.jsonl)")
      .add("train-fraction", o.train_fraction, "fit on this leading fraction of rows")
      .flag("standardize", o.standardize, "zero-mean unit-variance per variable, fitted on the training rows");

  f = make("forecast", "iterate a fitted model past the end of a panel", cmd_forecast);
  f->add("model", o.model, "model JSON")
      .add("input", o.input, "panel CSV supplying the last p observations")
      .add("horizon", o.horizon, "steps ahead")
      .add("output", o.output, "forecast CSV (stdout when absent)");

  f = make("eval", "one-step MSE of a model on held-out rows, or of a prediction file", cmd_eval);
  f->add("model", o.model, "model JSON")
      .add("input", o.input, "panel CSV (truth)")
      .add("pred", o.pred, "prediction CSV to compare with --input")
      .add("train-fraction", o.train_fraction, "evaluate rows after this fraction (default: the model's split)")
      .add("output", o.output, "write the one-step predictions here");

  f = make("rank-select", "select Tucker ranks from the nuclear-norm estimate", cmd_rank_select);
  solver_flags(f);
  f->add("input", o.input, "panel CSV")
      .add("train-fraction", o.train_fraction, "use this leading fraction of rows")
      .flag("standardize", o.standardize, "standardize on the rows used");

  f = make("bench", "estimation error curves for STDGR and NNM", cmd_bench);
  solver_flags(f);
  scenario_flags(f);
  f->add("seeds", o.seeds, "comma-separated seeds")
      .add("seed", o.seed, "single seed when --seeds is absent")
      .add("sample-sizes", o.sample_sizes, "comma-separated T values")
      .add("output", o.output, "curve CSV (stdout when absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    for (const auto& cmd : commands) {
      if (!cmd.app->parsed()) continue;
      if (o.config) cmd.flags->apply_config(*o.config);
      return cmd.run(o);
    }
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataFormatError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
