#pragma once

// Small seeded generators for property tests.

#include <cstdint>
#include <random>
#include <vector>

namespace gen {

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(20240611u);
  return engine;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }

inline std::vector<double> nonneg_list(int n, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(0.0, hi);
  return v;
}

}  // namespace gen
