#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "stdgr/tensor.hpp"

namespace stdgr {

// Seeded generator with a platform-independent normal sampler: uniforms take
// the top 53 bits of mt19937_64 and normals use the Marsaglia polar method,
// so a seed yields the same stream under every standard library.
class Rng {
 public:
  static constexpr std::string_view algorithm = "mt19937_64+marsaglia-polar";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  Matrix normal_matrix(Index rows, Index cols);
  Vector normal_vector(Index n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace stdgr
