#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "stablearena/core.hpp"

namespace stablearena::classic {

struct ClassicConfig {
  double k_factor = 4.0;
  ScaleConstant scale = ScaleConstant::elo();
  double r_init = 1000.0;

  void validate() const;
};

// K * (W - P(r_i, r_j)), the change applied to the first model.
double update_delta(double r_i, double r_j, Outcome w, const ClassicConfig& cfg);

// One sequential Elo update. The pair sum is conserved up to rounding.
std::pair<double, double> update_pair(double r_i, double r_j, Outcome w, const ClassicConfig& cfg);

// One pass over the records in ingestion order, all models starting at r_init.
// The result depends on record order.
RatingVector run_pass(const Dataset& dataset, const ClassicConfig& cfg);

struct ShuffleSummary {
  RatingVector mean;
  std::vector<double> std;  // population standard deviation
  std::vector<double> min;
  std::vector<double> max;
  std::size_t n_shuffles = 0;
  std::uint64_t seed = 0;
};

// run_pass over n_shuffles seeded Fisher-Yates permutations of the
// canonical record order. Bit-reproducible for a given seed.
ShuffleSummary shuffled_mean(const Dataset& dataset, const ClassicConfig& cfg,
                             std::size_t n_shuffles, std::uint64_t seed);

}  // namespace stablearena::classic
