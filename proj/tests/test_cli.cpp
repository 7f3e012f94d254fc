#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "stdgr/error.hpp"
#include "stdgr/io.hpp"

using namespace stdgr;
namespace fs = std::filesystem;

namespace {

const fs::path& dir() {
  static const fs::path d = [] {
    const fs::path p = fs::temp_directory_path() / "stdgr_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string at(const std::string& name) { return (dir() / name).string(); }

int run(const std::string& args, const std::string& stdout_to = "") {
  const std::string out = stdout_to.empty() ? at("stdout.txt") : stdout_to;
  const std::string cmd = std::string(STDGR_CLI_PATH) + " " + args + " > " + out + " 2> " + at("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) { return io::read_file(path); }

std::vector<io::json> jsonl(const std::string& path) {
  std::vector<io::json> out;
  std::istringstream is(slurp(path));
  for (std::string line; std::getline(is, line);)
    if (!line.empty()) out.push_back(io::json::parse(line));
  return out;
}

// p = 1, W_1 = diag(d)
void write_diag_model(const std::string& path, double d) {
  io::ModelFile mf;
  mf.variables = {"a", "b"};
  mf.p = 1;
  mf.ranks = {2, 2, 1};
  mf.factors = {Tensor3({2, 2, 1}, {d, 0.0, 0.0, d}), Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                Matrix::Identity(1, 1)};
  mf.u = {mf.factors.a1, mf.factors.a2, mf.factors.a3};
  mf.laplacians = {Matrix::Zero(2, 2), Matrix::Zero(2, 2), Matrix::Zero(1, 1), 0.2};
  mf.w = tucker_reconstruct(mf.factors);
  mf.train_rows = 2;
  io::save_model(path, mf);
}

const std::string kSimBase = "simulate --m 6 --p 2 --ranks 2,2,2 --superdiag 1,1 --length 80 --seed 3";
const std::string kSim = kSimBase + " --noise-scale 0.5";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate is deterministic and writes the truth sidecar") {
  REQUIRE(run(kSim + " --output " + at("a.csv")) == 0);
  REQUIRE(run(kSim + " --output " + at("b.csv")) == 0);
  CHECK(slurp(at("a.csv")) == slurp(at("b.csv")));
  const SeriesPanel p = io::read_panel_csv(at("a.csv"));
  CHECK(p.m() == 6);
  CHECK(p.length() == 80);
  const auto truth = io::json::parse(slurp(at("a.csv.truth.json")));
  CHECK(truth["seed"] == 3);
  CHECK(truth.contains("prng"));

  REQUIRE(run(kSimBase + " --noise-scale 0 --output " + at("zero.csv")) == 0);
  CHECK(io::read_panel_csv(at("zero.csv")).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fit, diagnostics and eval") {
  REQUIRE(run(kSim + " --output " + at("fit.csv")) == 0);
  const int rc = run("fit --input " + at("fit.csv") + " --p 2 --train-fraction 0.8 --output " + at("model.json"));
  CHECK((rc == 0 || rc == 2));
  const auto lines = jsonl(at("model.json.diagnostics.jsonl"));
  REQUIRE(lines.size() >= 3);
  CHECK(lines.front().contains("setup"));
  CHECK(lines.front()["setup"]["ranks_selected"] == true);
  CHECK(lines.back().contains("done"));
  CHECK((lines.back()["done"]["converged"] == true) == (rc == 0));
  double prev = lines.front()["setup"]["F0"].get<double>();
  for (std::size_t k = 1; k + 1 < lines.size(); ++k) {
    const double f = lines[k]["F"].get<double>();
    CHECK(f <= prev + 1e-9 * std::max(1.0, std::abs(prev)));
    prev = f;
  }

  // Fixed ranks are echoed.
  run("fit --input " + at("fit.csv") + " --p 2 --ranks 1,2,1 --output " + at("model2.json"));
  const auto fixed = jsonl(at("model2.json.diagnostics.jsonl"));
  CHECK(fixed.front()["setup"]["ranks"] == io::json::array({1, 2, 1}));
  CHECK(fixed.front()["setup"]["ranks_selected"] == false);

  // A one-iteration cap reports the max-iteration code.
  CHECK(run("fit --input " + at("fit.csv") + " --p 2 --tol 1e-12 --max-iter 1 --output " + at("m3.json")) == 2);

  REQUIRE(run("eval --model " + at("model.json") + " --input " + at("fit.csv")) == 0);
  const auto ev = io::json::parse(slurp(at("stdout.txt")));
  CHECK(ev["mse"].get<double>() > 0.0);
  CHECK(ev["first_row"] == 64);
  CHECK(ev["rows"] == 16);
  // A model fitted on every row leaves nothing to evaluate.
  CHECK(run("eval --model " + at("model2.json") + " --input " + at("fit.csv")) == 64);
  CHECK(run("eval --pred " + at("fit.csv") + " --input " + at("fit.csv")) == 0);
  CHECK(io::json::parse(slurp(at("stdout.txt")))["mse"] == 0.0);
}

TEST_CASE("forecast iterates the model") {
  write_diag_model(at("half.json"), 0.5);
  std::ofstream(at("last.csv")) << "a,b\n9,9\n4,4\n";
  REQUIRE(run("forecast --model " + at("half.json") + " --input " + at("last.csv") + " --horizon 2 --output " +
              at("fc.csv")) == 0);
  const SeriesPanel fc = io::read_panel_csv(at("fc.csv"));
  REQUIRE(fc.length() == 2);
  CHECK(fc.values(0, 0) == 2.0);
  CHECK(fc.values(0, 1) == 2.0);
  CHECK(fc.values(1, 0) == 1.0);
  CHECK(fc.values(1, 1) == 1.0);

  write_diag_model(at("zero.json"), 0.0);
  REQUIRE(run("forecast --model " + at("zero.json") + " --input " + at("last.csv") + " --horizon 3 --output " +
              at("fz.csv")) == 0);
  CHECK(io::read_panel_csv(at("fz.csv")).values.cwiseAbs().maxCoeff() == 0.0);

  // h = 1 equals the one-step prediction.
  REQUIRE(run(kSim + " --output " + at("h1.csv")) == 0);
  REQUIRE(run("fit --input " + at("h1.csv") + " --p 2 --max-iter 5 --output " + at("h1.json")) >= 0);
  REQUIRE(run("forecast --model " + at("h1.json") + " --input " + at("h1.csv") + " --output " + at("h1f.csv")) == 0);
  const io::ModelFile mf = io::load_model(at("h1.json"));
  const Matrix values = io::read_panel_csv(at("h1.csv")).values;
  const Vector expect = predict_one_step(mf.transition(), lag_vector(values, values.rows(), 2));
  const Matrix got = io::read_panel_csv(at("h1f.csv")).values;
  CHECK((got.row(0).transpose() - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rank-select and bench") {
  REQUIRE(run("simulate --m 8 --p 3 --ranks 2,2,2 --superdiag 1,1 --noise-scale 0.1 --length 600 --seed 2 --output " +
              at("rs.csv")) == 0);
  REQUIRE(run("rank-select --input " + at("rs.csv") + " --p 3 --lambda-nn 0.005") == 0);
  const auto rs = io::json::parse(slurp(at("stdout.txt")));
  CHECK(rs["ranks"] == io::json::array({2, 2, 2}));
  CHECK(rs["c_bar"].get<double>() > 0.0);

  REQUIRE(run("bench --m 5 --p 2 --ranks 2,2,2 --superdiag 1,1 --seeds 1,2 --sample-sizes 40,80 --max-iter 5 "
              "--output " + at("curve.csv")) == 0);
  const std::string curve = slurp(at("curve.csv"));
  CHECK(curve.rfind("method,T,upsilon,mean_error,stderr\n", 0) == 0);
  CHECK(std::count(curve.begin(), curve.end(), '\n') == 5);
}

TEST_CASE("config files and error exit codes") {
  REQUIRE(run(kSim + " --output " + at("cfg.csv")) == 0);
  std::ofstream(at("good.json")) << R"({"p": 2, "ranks": [1,1,1], "max-iter": 3})";
  CHECK(run("fit --config " + at("good.json") + " --input " + at("cfg.csv") + " --output " + at("cfg.model.json")) !=
        64);
  CHECK(jsonl(at("cfg.model.json.diagnostics.jsonl")).front()["setup"]["ranks"] == io::json::array({1, 1, 1}));
  // The command line wins over the file.
  run("fit --config " + at("good.json") + " --ranks 2,1,1 --input " + at("cfg.csv") + " --output " + at("cfg2.json"));
  CHECK(jsonl(at("cfg2.json.diagnostics.jsonl")).front()["setup"]["ranks"] == io::json::array({2, 1, 1}));

  std::ofstream(at("bad.json")) << R"({"p": 2, "betta": 1})";
  CHECK(run("fit --config " + at("bad.json") + " --input " + at("cfg.csv") + " --output " + at("x.json")) == 64);
  CHECK(run("fit --input " + at("cfg.csv") + " --p 2 --abar1 1 --output " + at("x.json")) == 64);
  CHECK(run("fit --input " + at("cfg.csv") + " --p 2 --bogus 1") == 64);
  CHECK(run("") == 64);

  std::ofstream(at("broken.csv")) << "a,b\n1,2\n3\n4,5\n";
  CHECK(run("fit --input " + at("broken.csv") + " --p 1 --output " + at("x.json")) == 65);
  CHECK(slurp(at("stderr.txt")).find("line 3") != std::string::npos);
  CHECK(run("fit --input " + at("missing.csv") + " --p 1 --output " + at("x.json")) != 0);
}

}  // TEST_SUITE
