#include "stablearena/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace stablearena::metrics {

double mse(std::span<const double> predictions, std::span<const double> outcomes) {
  if (predictions.size() != outcomes.size()) throw InvalidArgument("mse: length mismatch");
  if (predictions.empty()) throw InvalidArgument("mse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - outcomes[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predictions.size());
}

double auc(std::span<const double> predictions, std::span<const double> outcomes) {
  if (predictions.size() != outcomes.size()) throw InvalidArgument("auc: length mismatch");
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (outcomes[i] == 1.0) scored.emplace_back(predictions[i], true);
    else if (outcomes[i] == 0.0) scored.emplace_back(predictions[i], false);
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double positives = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < scored.size();) {
    std::size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (scored[t].second) {
        positives += 1.0;
        rank_sum += avg_rank;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(scored.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) {
    throw UndefinedAuc("auc needs at least one win and one loss among decisive records");
  }
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

Ranking rank(std::span<const ModelId> models, std::span<const double> values) {
  if (models.size() != values.size()) throw InvalidArgument("rank: length mismatch");
  std::vector<std::size_t> idx(models.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return models[a] < models[b];
  });
  Ranking out;
  out.order.reserve(idx.size());
  for (auto i : idx) out.order.push_back(models[i]);
  return out;
}

Ranking rank(const RatingVector& ratings) { return rank(ratings.models, ratings.values); }

Ranking reversed(const Ranking& r) { return {{r.order.rbegin(), r.order.rend()}}; }

double ranking_consistency(const Ranking& a, const Ranking& b) {
  if (a.order.size() != b.order.size()) throw InvalidArgument("rankings cover different model sets");
  std::unordered_map<ModelId, std::size_t> pos_b;
  for (std::size_t i = 0; i < b.order.size(); ++i) pos_b[b.order[i]] = i;
  std::vector<std::size_t> mapped;
  mapped.reserve(a.order.size());
  for (const auto& m : a.order) {
    auto it = pos_b.find(m);
    if (it == pos_b.end()) throw InvalidArgument("rankings cover different model sets");
    mapped.push_back(it->second);
  }
  const std::size_t n = mapped.size();
  if (n < 2) return 1.0;
  std::size_t concordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (mapped[i] < mapped[j]) ++concordant;
    }
  }
  return static_cast<double>(concordant) / static_cast<double>(n * (n - 1) / 2);
}

double multi_run_consistency(std::span<const Ranking> rankings) {
  if (rankings.size() < 2) throw InvalidArgument("multi_run_consistency needs at least 2 rankings");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    for (std::size_t j = i + 1; j < rankings.size(); ++j) {
      sum += ranking_consistency(rankings[i], rankings[j]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

DetectionOutcome detect(const amelo::AbilityVector& abilities, const std::set<AnnotatorId>& truth,
                        double epsilon) {
  const std::set<AnnotatorId> registry(abilities.annotators.begin(), abilities.annotators.end());
  for (const auto& t : truth) {
    if (!registry.contains(t)) throw InvalidArgument("truth annotator '" + t.str() + "' has no ability");
  }
  DetectionOutcome out;
  out.truth = truth;
  for (std::size_t k = 0; k < abilities.size(); ++k) {
    if (abilities.values[k] < epsilon) out.predicted_anomalous.insert(abilities.annotators[k]);
  }
  std::size_t tp = 0;
  for (const auto& a : out.predicted_anomalous) tp += truth.contains(a) ? 1 : 0;
  const auto predicted = out.predicted_anomalous.size();
  if (predicted == 0 && truth.empty()) {
    out.precision = out.recall = out.f1 = 1.0;
    return out;
  }
  out.precision = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
  out.recall = truth.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(truth.size());
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

double detection_f1(const amelo::AbilityVector& abilities, const std::set<AnnotatorId>& truth,
                    double epsilon) {
  return detect(abilities, truth, epsilon).f1;
}

}  // namespace stablearena::metrics
