#pragma once

#include <cstdint>

#include "stdgr/random.hpp"
#include "stdgr/tensor.hpp"

namespace testing {

inline stdgr::Tensor3 random_tensor(stdgr::Rng& rng, stdgr::Dims d) {
  stdgr::Tensor3 t(d);
  for (double& v : t.values()) v = rng.normal();
  return t;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

inline double max_abs_diff(const stdgr::Matrix& a, const stdgr::Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const stdgr::Tensor3& a, const stdgr::Tensor3& b) {
  double m = 0.0;
  for (stdgr::Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace testing
