#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "csm/core.hpp"

namespace csm::testing {

// Hand-rolled generators for property tests. Every generator is seeded so
// failures reproduce.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  HalfInt spin(int max_twice = 4) { return HalfInt::from_twice(integer(1, max_twice)); }

  ModelParams model(int max_twice_s, int max_N) {
    return {spin(max_twice_s), integer(1, max_N), uniform(-2.0, 2.0), uniform(-2.0, 2.0)};
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace csm::testing
