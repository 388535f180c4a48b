#include "stablearena/synthetic.hpp"

#include <cstdio>
#include <string>

#include "stablearena/random.hpp"

namespace stablearena::synthetic {

namespace {

std::string label(char prefix, std::size_t i, std::size_t count) {
  const int width = count > 100 ? 3 : 2;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, i);
  return buf;
}

}  // namespace

SyntheticArena make_arena(const SyntheticConfig& cfg) {
  if (cfg.n_models < 2) throw InvalidArgument("synthetic arena needs at least 2 models");
  if (cfg.n_annotators < 1) throw InvalidArgument("synthetic arena needs at least 1 annotator");
  if (!cfg.annotator_theta.empty() && cfg.annotator_theta.size() != cfg.n_annotators) {
    throw InvalidArgument("annotator_theta must have one entry per annotator");
  }
  if (!(cfg.tie_rate >= 0.0 && cfg.tie_rate < 1.0)) throw InvalidArgument("tie_rate must lie in [0, 1)");

  std::vector<ModelId> models;
  std::vector<double> truth;
  const double mid = 0.5 * static_cast<double>(cfg.n_models - 1);
  for (std::size_t i = 0; i < cfg.n_models; ++i) {
    models.emplace_back(label('m', i, cfg.n_models));
    truth.push_back(cfg.rating_gap * (static_cast<double>(i) - mid));
  }
  std::vector<AnnotatorId> annotators;
  for (std::size_t k = 0; k < cfg.n_annotators; ++k) {
    annotators.emplace_back(label('a', k, cfg.n_annotators));
  }

  Rng rng(cfg.seed);
  std::vector<ComparisonRecord> records;
  auto judge = [&](std::size_t i, std::size_t j, std::size_t k) {
    const double theta = cfg.annotator_theta.empty() ? 1.0 : cfg.annotator_theta[k];
    Outcome w = Outcome::tie();
    if (rng.uniform() >= cfg.tie_rate) {
      w = rng.uniform() < sigmoid(theta * (truth[i] - truth[j])) ? Outcome::first_wins()
                                                                   : Outcome::second_wins();
    }
    records.push_back({models[i], models[j], annotators[k], w});
  };

  if (cfg.records_per_pair > 0) {
    for (std::size_t i = 0; i < cfg.n_models; ++i) {
      for (std::size_t j = i + 1; j < cfg.n_models; ++j) {
        for (std::size_t t = 0; t < cfg.records_per_pair; ++t) {
          const auto k = static_cast<std::size_t>(rng.below(cfg.n_annotators));
          // random side assignment
          if (rng.uniform() < 0.5) judge(i, j, k);
          else judge(j, i, k);
        }
      }
    }
  } else {
    for (std::size_t k = 0; k < cfg.n_annotators; ++k) {
      for (std::size_t t = 0; t < cfg.records_per_annotator; ++t) {
        const auto i = static_cast<std::size_t>(rng.below(cfg.n_models));
        auto j = static_cast<std::size_t>(rng.below(cfg.n_models - 1));
        if (j >= i) ++j;
        judge(i, j, k);
      }
    }
  }

  // registries come from the records, so an annotator who drew no battles is absent
  return {Dataset(std::move(records)), {models, truth, Anchor::MeanZero}};
}

}  // namespace stablearena::synthetic
