#pragma once

#include <doctest.h>

#include <cmath>
#include <map>
#include <memory>

#include "addwav/rng.hpp"
#include "addwav/wavelet_basis.hpp"

namespace testing {

/// Cached cascade tables, one per (R, depth).
inline const addwav::BasisTable& table(int R, int depth = 12) {
  static std::map<std::pair<int, int>, std::unique_ptr<addwav::BasisTable>> cache;
  auto& slot = cache[{R, depth}];
  if (!slot) slot = std::make_unique<addwav::BasisTable>(addwav::cascade_table(addwav::make_family(R), depth));
  return *slot;
}

/// Small seeded generator for hand-rolled property tests.
struct Gen {
  addwav::Engine eng;
  explicit Gen(std::uint64_t seed) : eng(addwav::make_engine(seed)) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
};

}  // namespace testing
