#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string_view>

#include "stablearena/core.hpp"

namespace stablearena::perturb {

enum class Strategy {
  Random,  // decisive outcome becomes a tie or the opposite result, 50/50
  Equal,   // every outcome becomes a tie
  Flip,    // decisive outcomes swap sides, ties stay
  Mixed,   // one of the three above, drawn uniformly per record
};

std::string_view to_string(Strategy s);
// Case-insensitive name; throws InvalidArgument for anything else.
Strategy parse_strategy(std::string_view name);

struct PerturbationPlan {
  std::set<AnnotatorId> targets;
  Strategy strategy = Strategy::Flip;
  std::uint64_t seed = 0;
  // Permit more than half of the annotators to be corrupted.
  bool allow_majority = false;
};

struct PerturbedDataset {
  Dataset dataset;
  std::map<AnnotatorId, bool> anomalous;  // ground truth for every annotator
};

Outcome flip(Outcome w);
Outcome equal(Outcome w);
// Ties pass through; otherwise tie when draw < 0.5, else the opposite result.
Outcome perturb_outcome_random(Outcome w, double draw);

// Only targeted annotators' outcomes change; everything else is bit-identical.
// Randomness is counter-based on (seed, record index), so results depend only
// on the plan and the record order.
PerturbedDataset apply(const Dataset& dataset, const PerturbationPlan& plan);

// ceil(ratio * M) annotators drawn uniformly without replacement.
std::set<AnnotatorId> sample_targets(const Dataset& dataset, double ratio, std::uint64_t seed);

}  // namespace stablearena::perturb
