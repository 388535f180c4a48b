#pragma once

#include <set>
#include <span>
#include <vector>

#include "stablearena/amelo.hpp"
#include "stablearena/core.hpp"

namespace stablearena::metrics {

// Mean squared error between predicted win probabilities and outcomes.
double mse(std::span<const double> predictions, std::span<const double> outcomes);

// Rank-based AUC on decisive records (ties are dropped). Tied predictions
// share their average rank, so constant predictions give 0.5. Throws
// UndefinedAuc when a class is missing.
double auc(std::span<const double> predictions, std::span<const double> outcomes);

// Models by rating, best first; equal ratings ordered by model id.
struct Ranking {
  std::vector<ModelId> order;

  friend bool operator==(const Ranking&, const Ranking&) = default;
};

Ranking rank(const RatingVector& ratings);
Ranking rank(std::span<const ModelId> models, std::span<const double> values);
Ranking reversed(const Ranking& r);

// Fraction of unordered model pairs ordered the same way in both rankings.
double ranking_consistency(const Ranking& a, const Ranking& b);

// Mean ranking_consistency over all pairs of runs.
double multi_run_consistency(std::span<const Ranking> rankings);

struct DetectionOutcome {
  std::set<AnnotatorId> predicted_anomalous;
  std::set<AnnotatorId> truth;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Annotators with theta < epsilon are predicted anomalous.
DetectionOutcome detect(const amelo::AbilityVector& abilities, const std::set<AnnotatorId>& truth,
                        double epsilon);
double detection_f1(const amelo::AbilityVector& abilities, const std::set<AnnotatorId>& truth,
                    double epsilon);

}  // namespace stablearena::metrics
