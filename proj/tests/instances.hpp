#pragma once

// Random problem instances shared by the unit and acceptance tests.

#include <cstdint>

#include "stdgr/palm.hpp"
#include "stdgr/random.hpp"

namespace testing {

inline stdgr::Matrix random_orthonormal(stdgr::Rng& rng, stdgr::Index n, stdgr::Index r) {
  return Eigen::HouseholderQR<stdgr::Matrix>(rng.normal_matrix(n, r)).householderQ() *
         stdgr::Matrix::Identity(n, r);
}

struct GradientInstance {
  stdgr::DesignPair design;
  stdgr::SolverState state;
};

// Random design from a random VAR-like map plus noise; state with a core
// inside [-c, c] and U_i = A_i + perturbation so every coupling term is live.
inline GradientInstance gradient_instance(std::uint64_t seed, stdgr::Index m, stdgr::Index p, stdgr::Index t,
                                          stdgr::RankTriple r, double c = 1.0) {
  stdgr::Rng rng(seed);
  GradientInstance g;
  g.design.p = p;
  g.design.x = rng.normal_matrix(t, m * p);
  g.design.y = 0.3 * g.design.x * rng.normal_matrix(m, m * p).transpose() + rng.normal_matrix(t, m);
  g.state.g = stdgr::Tensor3({r.r1, r.r2, r.r3});
  for (double& v : g.state.g.values()) v = rng.uniform(-c, c);
  const stdgr::Index n[3] = {m, m, p};
  const stdgr::Index rr[3] = {r.r1, r.r2, r.r3};
  for (int i = 0; i < 3; ++i) {
    g.state.a[i] = random_orthonormal(rng, n[i], rr[i]);
    g.state.u[i] = g.state.a[i] + 0.1 * rng.normal_matrix(n[i], rr[i]);
  }
  return g;
}

}  // namespace testing
