#include "stdgr/bench.hpp"

#include <Eigen/Eigenvalues>
#include <charconv>
#include <cmath>
#include <sstream>
#include <string>

#include "stdgr/error.hpp"
#include "stdgr/linalg.hpp"
#include "stdgr/random.hpp"

namespace stdgr {

FactorStyle parse_factor_style(const std::string& s) {
  if (s == "gaussian-svd") return FactorStyle::gaussian_svd;
  if (s == "laplacian-eigenvectors") return FactorStyle::laplacian_eigenvectors;
  throw UsageError("unknown factor style '" + s +
                   "' (expected gaussian-svd or laplacian-eigenvectors)");
}

std::string to_string(FactorStyle s) {
  return s == FactorStyle::gaussian_svd ? "gaussian-svd" : "laplacian-eigenvectors";
}

void ScenarioSpec::validate() const {
  validate_ranks(ranks, m, p);
  const Index rmin = std::min({ranks.r1, ranks.r2, ranks.r3});
  if (static_cast<Index>(superdiag.size()) != rmin) {
    throw UsageError("superdiag needs min(r1,r2,r3) = " + std::to_string(rmin) + " entries");
  }
  if (init_scale < 0.0) throw UsageError("init scale must be non-negative");
  if (burn_in < 0) throw UsageError("burn-in must be non-negative");
  if (noise_scale < 0.0) throw UsageError("noise scale must be non-negative");
  if (seeds.empty()) throw UsageError("at least one seed required");
  for (Index t : sample_sizes) {
    if (t < 1) throw UsageError("sample sizes must be positive");
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Matrix gaussian_svd_factor(Rng& rng, Index n, Index r) {
  return leading_left_singular_vectors(rng.normal_matrix(n, r), r);
}

// Eigenvectors of the r smallest eigenvalues of a random-weight Laplacian.
Matrix laplacian_eigenvector_factor(Rng& rng, Index n, Index r) {
  Matrix z = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) z(i, j) = z(j, i) = rng.uniform();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(graph_laplacian(z));
  Matrix a = es.eigenvectors().leftCols(r);
  canonicalize_signs(a);
  return a;
}

}  // namespace

std::uint64_t noise_seed(std::uint64_t scenario_seed) { return splitmix64(scenario_seed ^ 0x5eedULL); }

Scenario make_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(splitmix64(seed));
  Scenario sc;
  const Index n[3] = {spec.m, spec.m, spec.p};
  const Index r[3] = {spec.ranks.r1, spec.ranks.r2, spec.ranks.r3};
  std::array<Matrix, 3> a;
  for (int i = 0; i < 3; ++i) {
    a[i] = spec.factor_style == FactorStyle::gaussian_svd
               ? gaussian_svd_factor(rng, n[i], r[i])
               : laplacian_eigenvector_factor(rng, n[i], r[i]);
  }
  std::vector<double> diag = spec.superdiag;
  for (Index attempt = 0;; ++attempt) {
    Tensor3 core({r[0], r[1], r[2]});
    for (std::size_t i = 0; i < diag.size(); ++i) {
      const Index ii = static_cast<Index>(i);
      core(ii, ii, ii) = diag[i];
    }
    sc.truth = {core, a[0], a[1], a[2]};
    sc.w = TransitionTensor(tucker_reconstruct(sc.truth));
    if (is_stable(sc.w)) break;
    if (attempt == 50) {
      throw UnstableModelError("scenario could not be stabilised within 50 rescalings (seed " +
                               std::to_string(seed) + ")");
    }
    for (double& g : diag) g *= 0.9;
    sc.rescalings = attempt + 1;
  }
  sc.nonzeros = 0;
  for (double v : sc.truth.core.values()) sc.nonzeros += (v != 0.0);
  return sc;
}

SeriesPanel simulate_scenario(const ScenarioSpec& spec, const Scenario& sc, std::uint64_t seed,
                              Index samples) {
  NoiseSpec noise{spec.noise_scale * spec.noise_scale * Matrix::Identity(spec.m, spec.m),
                  noise_seed(seed)};
  SimulationOptions opts;
  opts.burn_in = spec.burn_in;
  if (spec.init_scale > 0.0) {
    Rng rng(splitmix64(noise_seed(seed)));
    opts.initial_lags = spec.init_scale * rng.normal_matrix(spec.p, spec.m);
  }
  return simulate(sc.w, noise, samples + spec.p, opts);
}

double upsilon(Index s, Index m, Index p, Index samples) {
  const double rs = std::sqrt(static_cast<double>(s));
  return (rs + rs) * std::sqrt(std::log(static_cast<double>(m * m * p)) / static_cast<double>(samples));
}

namespace {

void summarize(ErrorCurveRow& row) {
  const double n = static_cast<double>(row.errors.size());
  double sum = 0.0;
  for (double e : row.errors) sum += e;
  row.mean_error = sum / n;
  double ss = 0.0;
  for (double e : row.errors) ss += (e - row.mean_error) * (e - row.mean_error);
  row.std_error = row.errors.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<ErrorCurveRow> error_curve(const ScenarioSpec& spec, const PipelineConfig& cfg) {
  spec.validate();
  if (spec.sample_sizes.empty()) throw UsageError("error_curve needs at least one sample size");
  std::vector<Scenario> scenarios;
  for (std::uint64_t seed : spec.seeds) scenarios.push_back(make_scenario(spec, seed));

  std::vector<ErrorCurveRow> rows;
  for (Index t : spec.sample_sizes) {
    ErrorCurveRow stdgr_row{"STDGR", t, 0.0, 0.0, 0.0, {}};
    ErrorCurveRow nnm_row{"NNM", t, 0.0, 0.0, 0.0, {}};
    for (std::size_t k = 0; k < spec.seeds.size(); ++k) {
      const Scenario& sc = scenarios[k];
      try {
        const SeriesPanel panel = simulate_scenario(spec, sc, spec.seeds[k], t);
        const DesignPair d = build_design(panel, spec.p);
        const PipelineResult fit = fit_pipeline(d, cfg);
        stdgr_row.errors.push_back((fit.fit.w_hat.tensor() - sc.w.tensor()).frobenius_norm());
        nnm_row.errors.push_back((fit.nnm.w.tensor() - sc.w.tensor()).frobenius_norm());
      } catch (const std::exception& e) {
        throw std::runtime_error("error_curve cell (T=" + std::to_string(t) +
                                 ", seed=" + std::to_string(spec.seeds[k]) + "): " + e.what());
      }
    }
    // s is a property of the scenario family; all seeds share the superdiagonal pattern.
    const double ups = upsilon(scenarios.front().nonzeros, spec.m, spec.p, t);
    stdgr_row.upsilon = nnm_row.upsilon = ups;
    summarize(stdgr_row);
    summarize(nnm_row);
    rows.push_back(std::move(stdgr_row));
    rows.push_back(std::move(nnm_row));
  }
  return rows;
}

std::string curve_csv(const std::vector<ErrorCurveRow>& rows) {
  std::ostringstream os;
  os << "method,T,upsilon,mean_error,stderr\n";
  for (const auto& r : rows) {
    os << r.method << ',' << r.samples << ',' << fmt(r.upsilon) << ',' << fmt(r.mean_error) << ','
       << fmt(r.std_error) << '\n';
  }
  return os.str();
}

Matrix one_step_predictions(const TransitionTensor& w, const Matrix& values, Index begin) {
  const Index p = w.p();
  if (begin < p) throw UsageError("one-step predictions need p rows of history");
  Matrix out(values.rows() - begin, values.cols());
  for (Index t = begin; t < values.rows(); ++t) {
    out.row(t - begin) = predict_one_step(w, lag_vector(values, t, p)).transpose();
  }
  return out;
}

ForecastReport rolling_eval(const SeriesPanel& panel, double train_fraction, Index p,
                            const PipelineConfig& cfg, bool standardize) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train fraction must lie in (0, 1)");
  }
  ForecastReport rep;
  rep.train_rows = static_cast<Index>(std::floor(train_fraction * static_cast<double>(panel.length())));
  rep.test_rows = panel.length() - rep.train_rows;
  if (rep.test_rows < 1) throw UsageError("train fraction leaves no test rows");
  if (rep.train_rows < p + 1) throw UsageError("training split too short for the lag order");

  const Standardizer sd = standardize ? Standardizer::fit(panel.values, rep.train_rows)
                                      : Standardizer::identity(panel.m());
  const Matrix scaled = sd.apply(panel.values);
  const DesignPair d =
      build_design(SeriesPanel{panel.names, scaled.topRows(rep.train_rows)}, p);
  const PipelineResult fit = fit_pipeline(d, cfg);
  rep.ranks = fit.ranks;
  rep.predictions = sd.invert(one_step_predictions(fit.fit.w_hat, scaled, rep.train_rows));
  rep.mse = mse(panel.values.bottomRows(rep.test_rows), rep.predictions);
  return rep;
}

}  // namespace stdgr
