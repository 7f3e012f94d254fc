#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "stdgr/bench.hpp"
#include "stdgr/error.hpp"

using namespace stdgr;
using testing::max_abs_diff;

namespace {

double orth_defect(const Matrix& a) {
  return (a.transpose() * a - Matrix::Identity(a.cols(), a.cols())).norm();
}

ScenarioSpec small_spec() {
  ScenarioSpec s;
  s.m = 6;
  s.p = 2;
  s.ranks = {2, 2, 2};
  s.superdiag = {1.0, 1.0};
  s.noise_scale = 0.5;
  return s;
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("scenario structure in both factor styles") {
  for (FactorStyle style : {FactorStyle::gaussian_svd, FactorStyle::laplacian_eigenvectors}) {
    ScenarioSpec spec = small_spec();
    spec.ranks = {3, 2, 2};
    spec.superdiag = {0.4, 0.3};
    spec.factor_style = style;
    const Scenario sc = make_scenario(spec, 11);
    CHECK(sc.nonzeros == 2);
    CHECK(sc.truth.core.dims() == Dims{3, 2, 2});
    CHECK(orth_defect(sc.truth.a1) <= 1e-12);
    CHECK(orth_defect(sc.truth.a2) <= 1e-12);
    CHECK(orth_defect(sc.truth.a3) <= 1e-12);
    CHECK(is_stable(sc.w));
    CHECK(sc.w.tensor() == tucker_reconstruct(sc.truth));
  }
  CHECK(parse_factor_style("laplacian-eigenvectors") == FactorStyle::laplacian_eigenvectors);
  CHECK(to_string(FactorStyle::gaussian_svd) == "gaussian-svd");
  CHECK_THROWS_AS(parse_factor_style("other"), UsageError);
}

TEST_CASE("large superdiagonals are rescaled until stable") {
  ScenarioSpec spec = small_spec();
  spec.superdiag = {50.0, 50.0};
  const Scenario sc = make_scenario(spec, 2);
  CHECK(sc.rescalings > 0);
  CHECK(is_stable(sc.w));
  const double expect = 50.0 * std::pow(0.9, static_cast<double>(sc.rescalings));
  CHECK(sc.truth.core(0, 0, 0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("scenario validation") {
  ScenarioSpec spec = small_spec();
  spec.superdiag = {1.0};
  CHECK_THROWS_AS(make_scenario(spec, 1), UsageError);
  spec = small_spec();
  spec.ranks = {7, 2, 2};
  CHECK_THROWS_AS(make_scenario(spec, 1), UsageError);
  spec = small_spec();
  spec.noise_scale = -1.0;
  CHECK_THROWS_AS(make_scenario(spec, 1), UsageError);
}

TEST_CASE("scenarios and panels are reproducible from the seed") {
  const ScenarioSpec spec = small_spec();
  const Scenario a = make_scenario(spec, 5), b = make_scenario(spec, 5), c = make_scenario(spec, 6);
  CHECK(a.w.tensor() == b.w.tensor());
  CHECK(!(a.w.tensor() == c.w.tensor()));
  const SeriesPanel pa = simulate_scenario(spec, a, 5, 40), pb = simulate_scenario(spec, b, 5, 40);
  CHECK(pa.values == pb.values);
  CHECK(pa.length() == 42);

  ScenarioSpec quiet = spec;
  quiet.noise_scale = 0.0;
  CHECK(simulate_scenario(quiet, a, 5, 30).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noise-free panels with initial lags follow the recursion exactly") {
  ScenarioSpec spec = small_spec();
  spec.noise_scale = 0.0;
  spec.burn_in = 0;
  spec.init_scale = 1.0;
  const Scenario sc = make_scenario(spec, 3);
  const SeriesPanel panel = simulate_scenario(spec, sc, 3, 50);
  CHECK(panel.values.cwiseAbs().maxCoeff() > 1e-3);
  const Matrix pred = one_step_predictions(sc.w, panel.values, 2);
  CHECK(max_abs_diff(pred, panel.values.bottomRows(50)) <= 1e-12);
}

TEST_CASE("upsilon formula") {
  // (sqrt(s) + sqrt(s)) sqrt(log(m^2 p) / T), computed directly
  for (Index s : {1, 3, 8})
    for (Index t : {50, 200, 1000}) {
      const double expect = 2.0 * std::sqrt(static_cast<double>(s)) * std::sqrt(std::log(10.0 * 10.0 * 3.0) / t);
      CHECK(std::abs(upsilon(s, 10, 3, t) - expect) <= 1e-12 * expect);
    }
  CHECK(upsilon(4, 10, 3, 400) < upsilon(4, 10, 3, 100));
}

TEST_CASE("error curve output") {
  ScenarioSpec spec = small_spec();
  spec.seeds = {1, 2};
  spec.sample_sizes = {60, 240};
  PipelineConfig cfg;
  cfg.stdgr.ranks = RankTriple{2, 2, 2};
  const auto rows = error_curve(spec, cfg);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].method == "STDGR");
  CHECK(rows[1].method == "NNM");
  CHECK(rows[2].samples == 240);
  for (const auto& r : rows) {
    CHECK(r.errors.size() == 2);
    CHECK(r.mean_error == doctest::Approx((r.errors[0] + r.errors[1]) / 2.0));
    CHECK(r.std_error == doctest::Approx(std::abs(r.errors[0] - r.errors[1]) / 2.0));
  }
  CHECK(rows[2].mean_error < rows[0].mean_error);
  CHECK(rows[3].mean_error < rows[1].mean_error);

  const std::string csv = curve_csv(rows);
  CHECK(csv.rfind("method,T,upsilon,mean_error,stderr\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv == curve_csv(error_curve(spec, cfg)));
}

TEST_CASE("rolling evaluation") {
  ScenarioSpec spec = small_spec();
  spec.noise_scale = 0.0;
  spec.burn_in = 0;
  spec.init_scale = 1.0;
  const Scenario sc = make_scenario(spec, 4);
  const SeriesPanel panel = simulate_scenario(spec, sc, 4, 80);
  PipelineConfig cfg;
  cfg.stdgr.ranks = RankTriple{2, 2, 2};
  const ForecastReport rep = rolling_eval(panel, 0.75, 2, cfg);
  CHECK(rep.train_rows == 61);
  CHECK(rep.test_rows == 21);
  CHECK(rep.predictions.rows() == 21);
  CHECK(rep.mse >= 0.0);
  const ForecastReport again = rolling_eval(panel, 0.75, 2, cfg);
  CHECK(rep.mse == again.mse);

  // The true model gives zero error on noise-free data.
  CHECK(mse(panel.values.bottomRows(21), one_step_predictions(sc.w, panel.values, 61)) <= 1e-24);

  // A single test row.
  const ForecastReport one = rolling_eval(panel.rows(0, 20), 0.95, 2, cfg);
  CHECK(one.test_rows == 1);

  CHECK_THROWS_AS(rolling_eval(panel, 1.0, 2, cfg), UsageError);
  CHECK_THROWS_AS(rolling_eval(panel, 0.01, 2, cfg), UsageError);
}

TEST_CASE("standardisation uses training rows only") {
  ScenarioSpec spec = small_spec();
  const Scenario sc = make_scenario(spec, 8);
  SeriesPanel panel = simulate_scenario(spec, sc, 8, 100);
  PipelineConfig cfg;
  cfg.stdgr.ranks = RankTriple{2, 2, 2};
  const ForecastReport base = rolling_eval(panel, 0.8, 2, cfg, true);
  // Changing the last test row moves only that row's error; the fit is untouched.
  SeriesPanel altered = panel;
  altered.values.row(panel.length() - 1).array() += 100.0;
  const ForecastReport moved = rolling_eval(altered, 0.8, 2, cfg, true);
  CHECK(max_abs_diff(base.predictions, moved.predictions) <= 1e-12);
}

}  // TEST_SUITE
