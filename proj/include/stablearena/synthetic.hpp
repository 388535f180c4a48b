#pragma once

#include <cstdint>
#include <vector>

#include "stablearena/core.hpp"

namespace stablearena::synthetic {

// Simulated arena with evenly spaced true ratings (natural units) and
// annotators who judge with their own discrimination. Model ids are "m00",
// "m01", ... with m00 the weakest; annotator ids are "a00", "a01", ...
struct SyntheticConfig {
  std::size_t n_models = 20;
  std::size_t n_annotators = 40;
  // Per-annotator mode: each annotator labels this many battles between
  // uniformly drawn distinct pairs.
  std::size_t records_per_annotator = 100;
  // Round-robin mode (used when > 0): every unordered pair battles this many
  // times, annotators assigned uniformly at random.
  std::size_t records_per_pair = 0;
  double rating_gap = 0.5;  // spacing between consecutive true ratings
  double tie_rate = 0.0;    // probability an honest judgment is a tie
  // True abilities; empty means 1 for everyone.
  std::vector<double> annotator_theta;
  std::uint64_t seed = 0;
};

struct SyntheticArena {
  Dataset dataset;
  RatingVector truth;
};

SyntheticArena make_arena(const SyntheticConfig& cfg);

}  // namespace stablearena::synthetic
