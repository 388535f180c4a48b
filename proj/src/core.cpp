#include "stablearena/core.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <numeric>
#include <tuple>
#include <unordered_set>

namespace stablearena {

Outcome::Outcome(double value) : value_(value) {
  if (!(value == 0.0 || value == 0.5 || value == 1.0)) {
    throw InvalidArgument("outcome must be 0, 0.5 or 1, got " + std::to_string(value));
  }
}

ScaleConstant::ScaleConstant(double c) : c_(c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("scale constant must be positive");
}

ScaleConstant ScaleConstant::elo() { return ScaleConstant(std::numbers::ln10 / 400.0); }

double RatingVector::at(const ModelId& id) const {
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (models[i] == id) return values[i];
  }
  throw InvalidArgument("no rating for model '" + id.str() + "'");
}

void OptimConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning_rate must be positive");
  }
  if (epochs < 1) throw InvalidArgument("epochs must be at least 1");
  if (!(grad_tol >= 0.0)) throw InvalidArgument("grad_tol must be nonnegative");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw InvalidArgument("ridge must be nonnegative");
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double residual(double w, double z) noexcept {
  // w - sigmoid(z) rewritten as w sigmoid(-z) - (1 - w) sigmoid(z), which
  // keeps its sign when sigmoid(z) rounds to 0 or 1
  return w * sigmoid(-z) - (1.0 - w) * sigmoid(z);
}

double clamped_log(double p) noexcept {
  constexpr double lo = 1e-12;
  return std::log(std::clamp(p, lo, 1.0 - lo));
}

double win_prob(double r_i, double r_j, ScaleConstant c) {
  if (!std::isfinite(r_i) || !std::isfinite(r_j)) {
    throw InvalidArgument("win_prob: ratings must be finite");
  }
  return sigmoid(c.value() * (r_i - r_j));
}

// ---------------------------------------------------------------------------
// Dataset

namespace {

template <typename Id>
std::vector<Id> sorted_unique(std::vector<Id> ids, const char* what) {
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw InvalidArgument(std::string("duplicate ") + what + " in registry");
  }
  return ids;
}

template <typename Id>
std::optional<std::size_t> find_sorted(const std::vector<Id>& ids, const Id& id) {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || !(*it == id)) return std::nullopt;
  return static_cast<std::size_t>(it - ids.begin());
}

}  // namespace

Dataset::Dataset(std::vector<ComparisonRecord> records) : records_(std::move(records)) {
  std::vector<ModelId> models;
  std::vector<AnnotatorId> annotators;
  models.reserve(2 * records_.size());
  annotators.reserve(records_.size());
  for (const auto& r : records_) {
    models.push_back(r.first);
    models.push_back(r.second);
    annotators.push_back(r.annotator);
  }
  std::sort(models.begin(), models.end());
  models.erase(std::unique(models.begin(), models.end()), models.end());
  std::sort(annotators.begin(), annotators.end());
  annotators.erase(std::unique(annotators.begin(), annotators.end()), annotators.end());
  models_ = std::move(models);
  annotators_ = std::move(annotators);
  build_index();
}

Dataset::Dataset(std::vector<ComparisonRecord> records, std::vector<ModelId> models,
                 std::vector<AnnotatorId> annotators)
    : records_(std::move(records)),
      models_(sorted_unique(std::move(models), "model")),
      annotators_(sorted_unique(std::move(annotators), "annotator")) {
  build_index();
}

void Dataset::build_index() {
  indexed_.clear();
  indexed_.reserve(records_.size());
  malformed_ = 0;
  std::vector<std::size_t> insertion;
  insertion.reserve(records_.size());
  for (std::size_t n = 0; n < records_.size(); ++n) {
    const auto& r = records_[n];
    const auto i = find_sorted(models_, r.first);
    const auto j = find_sorted(models_, r.second);
    const auto k = find_sorted(annotators_, r.annotator);
    if (!i || !j || !k || *i == *j) {
      ++malformed_;
      continue;
    }
    indexed_.push_back({static_cast<std::uint32_t>(*i), static_cast<std::uint32_t>(*j),
                        static_cast<std::uint32_t>(*k), r.outcome.value()});
    insertion.push_back(n);
  }

  std::vector<std::size_t> order(indexed_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = indexed_[a];
    const auto& y = indexed_[b];
    return std::tie(x.first, x.second, x.annotator, x.outcome, insertion[a]) <
           std::tie(y.first, y.second, y.annotator, y.outcome, insertion[b]);
  });
  canonical_.clear();
  canonical_.reserve(order.size());
  for (auto n : order) canonical_.push_back(indexed_[n]);
}

void Dataset::require_well_formed() const {
  if (!well_formed()) {
    throw InvalidArgument(std::to_string(malformed_) +
                          " record(s) are self-battles or reference unregistered ids");
  }
}

std::optional<std::size_t> Dataset::model_index(const ModelId& id) const {
  return find_sorted(models_, id);
}

std::optional<std::size_t> Dataset::annotator_index(const AnnotatorId& id) const {
  return find_sorted(annotators_, id);
}

std::vector<std::size_t> Dataset::annotator_counts() const {
  std::vector<std::size_t> counts(annotators_.size(), 0);
  for (const auto& r : indexed_) ++counts[r.annotator];
  return counts;
}

std::vector<std::size_t> Dataset::model_counts() const {
  std::vector<std::size_t> counts(models_.size(), 0);
  for (const auto& r : indexed_) {
    ++counts[r.first];
    ++counts[r.second];
  }
  return counts;
}

// ---------------------------------------------------------------------------
// Graph structure

Components comparison_components(const Dataset& dataset) {
  const std::size_t n = dataset.n_models();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& r : dataset.canonical()) {
    const auto a = find(r.first);
    const auto b = find(r.second);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  Components out;
  out.label.assign(n, 0);
  std::vector<std::size_t> root_label(n, static_cast<std::size_t>(-1));
  for (std::size_t m = 0; m < n; ++m) {
    const auto root = find(m);
    if (root_label[root] == static_cast<std::size_t>(-1)) root_label[root] = out.count++;
    out.label[m] = root_label[root];
  }
  return out;
}

bool mle_exists(const Dataset& dataset) {
  const std::size_t n = dataset.n_models();
  // edge a -> b when a took any outcome mass from b
  std::vector<std::vector<std::size_t>> fwd(n), rev(n);
  for (const auto& r : dataset.canonical()) {
    if (r.outcome > 0.0) {
      fwd[r.first].push_back(r.second);
      rev[r.second].push_back(r.first);
    }
    if (r.outcome < 1.0) {
      fwd[r.second].push_back(r.first);
      rev[r.first].push_back(r.second);
    }
  }
  const auto comps = comparison_components(dataset);
  auto reach = [&](const std::vector<std::vector<std::size_t>>& g, std::size_t start) {
    std::vector<char> seen(n, 0);
    std::deque<std::size_t> queue{start};
    seen[start] = 1;
    std::size_t count = 1;
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      for (auto w : g[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          queue.push_back(w);
        }
      }
    }
    return count;
  };
  std::vector<std::size_t> size(comps.count, 0);
  std::vector<std::size_t> rep(comps.count, static_cast<std::size_t>(-1));
  for (std::size_t m = 0; m < n; ++m) {
    ++size[comps.label[m]];
    if (rep[comps.label[m]] == static_cast<std::size_t>(-1)) rep[comps.label[m]] = m;
  }
  for (std::size_t c = 0; c < comps.count; ++c) {
    if (reach(fwd, rep[c]) != size[c] || reach(rev, rep[c]) != size[c]) return false;
  }
  return true;
}

ValidationReport validate(const Dataset& dataset) {
  ValidationReport report;
  const auto& records = dataset.records();
  for (std::size_t n = 0; n < records.size(); ++n) {
    const auto& r = records[n];
    if (r.first == r.second) {
      report.errors.push_back({IssueKind::SelfBattle,
                               "self battle: model '" + r.first.str() + "' against itself", n});
    }
    for (const auto* id : {&r.first, &r.second}) {
      if (!dataset.model_index(*id)) {
        report.errors.push_back({IssueKind::UnregisteredModel,
                                 "unregistered model '" + id->str() + "'", n});
      }
    }
    if (!dataset.annotator_index(r.annotator)) {
      report.errors.push_back({IssueKind::UnregisteredAnnotator,
                               "unregistered annotator '" + r.annotator.str() + "'", n});
    }
  }
  if (dataset.n_models() < 2) {
    report.errors.push_back(
        {IssueKind::TooFewModels, "dataset needs at least 2 models", std::nullopt});
  }
  const auto comps = comparison_components(dataset);
  report.components = comps.count;
  if (comps.count > 1) {
    report.warnings.push_back(
        {IssueKind::Disconnected,
         std::to_string(comps.count) +
             " components; ratings are only comparable within a component",
         std::nullopt});
  }
  return report;
}

Dataset filter_min_records(const Dataset& dataset, std::size_t delta) {
  if (delta == 0) return dataset;
  std::unordered_map<AnnotatorId, std::size_t> counts;
  for (const auto& r : dataset.records()) ++counts[r.annotator];

  std::vector<ComparisonRecord> kept;
  std::unordered_set<ModelId> had_records, still_used;
  for (const auto& r : dataset.records()) {
    had_records.insert(r.first);
    had_records.insert(r.second);
    if (counts[r.annotator] >= delta) {
      kept.push_back(r);
      still_used.insert(r.first);
      still_used.insert(r.second);
    }
  }
  std::vector<ModelId> models;
  for (const auto& m : dataset.models()) {
    if (!had_records.contains(m) || still_used.contains(m)) models.push_back(m);
  }
  std::vector<AnnotatorId> annotators;
  for (const auto& a : dataset.annotators()) {
    auto it = counts.find(a);
    if (it != counts.end() && it->second >= delta) annotators.push_back(a);
  }
  return Dataset(std::move(kept), std::move(models), std::move(annotators));
}

WinMatrix win_matrix(const Dataset& dataset) {
  const std::size_t n = dataset.n_models();
  WinMatrix out{dataset.models(), std::vector<std::vector<std::size_t>>(n, std::vector<std::size_t>(n, 0)),
                std::vector<std::vector<std::size_t>>(n, std::vector<std::size_t>(n, 0))};
  for (const auto& r : dataset.canonical()) {
    if (r.outcome == 1.0) {
      ++out.wins[r.first][r.second];
    } else if (r.outcome == 0.0) {
      ++out.wins[r.second][r.first];
    } else {
      ++out.ties[r.first][r.second];
      ++out.ties[r.second][r.first];
    }
  }
  return out;
}

namespace detail {

std::vector<double> aligned_ratings(const RatingVector& ratings, const Dataset& dataset) {
  if (ratings.models.size() != ratings.values.size()) {
    throw InvalidArgument("rating vector: models and values differ in length");
  }
  if (ratings.models == dataset.models()) return ratings.values;
  std::vector<double> out(dataset.n_models());
  std::unordered_map<ModelId, double> lookup;
  for (std::size_t i = 0; i < ratings.models.size(); ++i) lookup[ratings.models[i]] = ratings.values[i];
  for (std::size_t m = 0; m < dataset.n_models(); ++m) {
    auto it = lookup.find(dataset.models()[m]);
    if (it == lookup.end()) {
      throw InvalidArgument("no rating for model '" + dataset.models()[m].str() + "'");
    }
    out[m] = it->second;
  }
  return out;
}

}  // namespace detail

}  // namespace stablearena
