#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "stdgr/error.hpp"
#include "stdgr/var_model.hpp"

using namespace stdgr;
using testing::max_abs_diff;

namespace {

TransitionTensor random_stable(Rng& rng, Index m, Index p, double scale) {
  std::vector<Matrix> lags;
  for (Index i = 0; i < p; ++i) lags.push_back(scale * rng.normal_matrix(m, m) / std::sqrt(double(m * p)));
  return TransitionTensor::from_lags(lags);
}

}  // namespace

TEST_SUITE("var_model") {

TEST_CASE("design of a scalar series") {
  Matrix v(3, 1);
  v << 1, 2, 3;
  const DesignPair d = build_design(SeriesPanel::from_values(v), 1);
  CHECK(d.samples() == 2);
  CHECK(d.x(0, 0) == 1);
  CHECK(d.x(1, 0) == 2);
  CHECK(d.y(0, 0) == 2);
  CHECK(d.y(1, 0) == 3);
  CHECK(build_design(SeriesPanel::from_values(v), 2).samples() == 1);
  CHECK_THROWS_AS(build_design(SeriesPanel::from_values(v), 3), UsageError);
  const DesignPair z = build_design(SeriesPanel::from_values(Matrix::Zero(6, 2)), 2);
  CHECK(z.x.isZero(0.0));
  CHECK(z.y.isZero(0.0));
}

TEST_CASE("design rows stack lags most recent first") {
  Rng rng(1);
  const Matrix v = rng.normal_matrix(7, 3);
  const DesignPair d = build_design(SeriesPanel::from_values(v), 2);
  for (Index t = 0; t < d.samples(); ++t) {
    CHECK(d.y.row(t) == v.row(t + 2));
    CHECK(d.x.row(t).head(3) == v.row(t + 1));
    CHECK(d.x.row(t).tail(3) == v.row(t));
    CHECK(lag_vector(v, t + 2, 2).transpose() == d.x.row(t));
  }
}

TEST_CASE("one-step prediction") {
  TransitionTensor half = TransitionTensor::from_lags({0.5 * Matrix::Identity(2, 2)});
  const Vector p = predict_one_step(half, Vector::Constant(2, 2.0));
  CHECK(p(0) == 1.0);
  CHECK(p(1) == 1.0);
  CHECK(predict_one_step(TransitionTensor(Tensor3({3, 3, 2})), Vector::Ones(6)).isZero(0.0));
  CHECK_THROWS_AS(predict_one_step(half, Vector::Ones(3)), UsageError);

  Rng rng(2);
  const TransitionTensor w = random_stable(rng, 4, 3, 0.5);
  const Vector x = rng.normal_vector(12);
  Vector naive = Vector::Zero(4);
  for (Index i = 0; i < 4; ++i)
    for (Index l = 0; l < 3; ++l)
      for (Index j = 0; j < 4; ++j) naive(i) += w.tensor()(i, j, l) * x(j + 4 * l);
  CHECK(max_abs_diff(predict_one_step(w, x), naive) <= 1e-12);
}

TEST_CASE("stability through the companion matrix") {
  CHECK(is_stable(TransitionTensor::from_lags({0.5 * Matrix::Identity(3, 3)})));
  CHECK_FALSE(is_stable(TransitionTensor::from_lags({Matrix::Identity(3, 3)})));
  Matrix a(1, 1), b(1, 1);
  a << 0.6;
  b << 0.5;
  const TransitionTensor w = TransitionTensor::from_lags({a, b});
  CHECK_FALSE(is_stable(w));
  CHECK(spectral_radius(w) == doctest::Approx((0.6 + std::sqrt(2.36)) / 2.0).epsilon(1e-12));
  const Matrix c = companion_matrix(w);
  CHECK(c.rows() == 2);
  CHECK(c(1, 0) == 1.0);
}

TEST_CASE("stability is preserved under shrinkage") {
  Rng rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    TransitionTensor w = random_stable(rng, 3, 2, 1.2);
    if (!is_stable(w)) continue;
    for (double s : {0.5, 0.9}) {
      Tensor3 t = w.tensor();
      t *= s;
      CHECK(is_stable(TransitionTensor(t)));
    }
  }
}

TEST_CASE("simulation: zero noise, determinism and rejection") {
  Rng rng(4);
  const TransitionTensor w = random_stable(rng, 3, 2, 0.5);
  REQUIRE(is_stable(w));
  const SeriesPanel zero = simulate(w, {Matrix::Zero(3, 3), 1}, 50);
  CHECK(zero.values.isZero(0.0));
  CHECK(zero.length() == 50);
  const SeriesPanel a = simulate(w, {Matrix::Identity(3, 3), 9}, 40);
  const SeriesPanel b = simulate(w, {Matrix::Identity(3, 3), 9}, 40);
  CHECK(a.values == b.values);
  CHECK(a.values != simulate(w, {Matrix::Identity(3, 3), 10}, 40).values);
  CHECK_THROWS_AS(simulate(TransitionTensor::from_lags({Matrix::Identity(3, 3)}), {Matrix::Identity(3, 3), 1}, 10),
                  UnstableModelError);
  Matrix bad = Matrix::Identity(3, 3);
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(simulate(w, {bad, 1}, 10), UsageError);
  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 1) = 0.1;
  CHECK_THROWS_AS(simulate(w, {asym, 1}, 10), UsageError);
}

TEST_CASE("pure-noise simulation has sample means near zero") {
  const Index t = 4000;
  const SeriesPanel s = simulate(TransitionTensor(Tensor3({3, 3, 1})), {Matrix::Identity(3, 3), 21}, t);
  for (Index j = 0; j < 3; ++j) CHECK(std::abs(s.values.col(j).mean()) <= 5.0 / std::sqrt(double(t)));
  // Unit variance, loosely.
  for (Index j = 0; j < 3; ++j) CHECK(s.values.col(j).squaredNorm() / t == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("noise-free simulation satisfies the design identity") {
  Rng rng(5);
  const TransitionTensor w = random_stable(rng, 4, 2, 0.8);
  REQUIRE(is_stable(w));
  SimulationOptions opts;
  opts.burn_in = 0;
  opts.initial_lags = rng.normal_matrix(2, 4);
  const SeriesPanel s = simulate(w, {Matrix::Zero(4, 4), 1}, 30, opts);
  CHECK(s.values.norm() > 0.1);
  const DesignPair d = build_design(s, 2);
  CHECK(max_abs_diff(d.y, d.x * w.unfolded().transpose()) <= 1e-10);
  // The first observation uses the supplied lags.
  CHECK(max_abs_diff(s.values.row(0).transpose(),
                     w.lag(1) * opts.initial_lags->row(0).transpose() + w.lag(2) * opts.initial_lags->row(1).transpose()) <=
        1e-12);
}

TEST_CASE("mse formula and properties") {
  Matrix a(1, 2), b(1, 2);
  a << 0, 0;
  b << 3, 4;
  CHECK(mse(a, b) == 12.5);
  CHECK(mse(b, a) == 12.5);
  Rng rng(6);
  const Matrix x = rng.normal_matrix(7, 3);
  CHECK(mse(x, x) == 0.0);
  CHECK(mse(x, (x.array() + 1.0).matrix()) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(mse(x, Matrix::Zero(7, 2)), UsageError);
}

TEST_CASE("standardizer uses the training rows only") {
  Matrix v(4, 2);
  v << 1, 5, 3, 5, 100, -7, 200, 9;
  const Standardizer s = Standardizer::fit(v, 2);
  CHECK(s.mean(0) == 2.0);
  CHECK(s.scale(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(s.scale(1) == 1.0);  // constant column
  CHECK(max_abs_diff(s.invert(s.apply(v)), v) <= 1e-12);
  CHECK(Standardizer::identity(2).apply(v) == v);
}

}  // TEST_SUITE
