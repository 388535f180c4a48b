#include "stablearena/perturb.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "stablearena/random.hpp"

namespace stablearena::perturb {

namespace {
constexpr std::uint64_t kStrategyStream = 1;
constexpr std::uint64_t kRandomStream = 2;
}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Random: return "random";
    case Strategy::Equal: return "equal";
    case Strategy::Flip: return "flip";
    case Strategy::Mixed: return "mixed";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  for (auto s : {Strategy::Random, Strategy::Equal, Strategy::Flip, Strategy::Mixed}) {
    if (lower == to_string(s)) return s;
  }
  throw InvalidArgument("unknown perturbation strategy '" + std::string(name) + "'");
}

Outcome flip(Outcome w) { return w.swapped(); }

Outcome equal(Outcome) { return Outcome::tie(); }

Outcome perturb_outcome_random(Outcome w, double draw) {
  if (w.is_tie()) return w;
  return draw < 0.5 ? Outcome::tie() : w.swapped();
}

PerturbedDataset apply(const Dataset& dataset, const PerturbationPlan& plan) {
  for (const auto& t : plan.targets) {
    if (!dataset.annotator_index(t)) {
      throw InvalidArgument("perturbation target '" + t.str() + "' is not a registered annotator");
    }
  }
  if (!plan.allow_majority && plan.targets.size() > dataset.n_annotators() / 2) {
    throw InvalidArgument("perturbation targets exceed half of the annotators (" +
                          std::to_string(plan.targets.size()) + " of " +
                          std::to_string(dataset.n_annotators()) + ")");
  }

  std::vector<ComparisonRecord> records = dataset.records();
  for (std::size_t n = 0; n < records.size(); ++n) {
    auto& r = records[n];
    if (!plan.targets.contains(r.annotator)) continue;
    Strategy s = plan.strategy;
    if (s == Strategy::Mixed) {
      const double pick = counter_uniform(plan.seed, n, kStrategyStream);
      s = pick < 1.0 / 3.0 ? Strategy::Random : (pick < 2.0 / 3.0 ? Strategy::Equal : Strategy::Flip);
    }
    switch (s) {
      case Strategy::Random:
        r.outcome = perturb_outcome_random(r.outcome, counter_uniform(plan.seed, n, kRandomStream));
        break;
      case Strategy::Equal: r.outcome = equal(r.outcome); break;
      case Strategy::Flip: r.outcome = flip(r.outcome); break;
      case Strategy::Mixed: break;
    }
  }

  PerturbedDataset out{Dataset(std::move(records), dataset.models(), dataset.annotators()), {}};
  for (const auto& a : dataset.annotators()) out.anomalous[a] = plan.targets.contains(a);
  return out;
}

std::set<AnnotatorId> sample_targets(const Dataset& dataset, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw InvalidArgument("ratio must lie in [0, 1]");
  const std::size_t m = dataset.n_annotators();
  const auto count = std::min(m, static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(m) - 1e-9)));
  std::vector<AnnotatorId> pool = dataset.annotators();
  Rng rng(seed);
  rng.shuffle(std::span<AnnotatorId>(pool));
  return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count)};
}

}  // namespace stablearena::perturb
