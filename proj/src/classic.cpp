#include "stablearena/classic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stablearena/random.hpp"

namespace stablearena::classic {

void ClassicConfig::validate() const {
  if (!(k_factor > 0.0) || !std::isfinite(k_factor)) throw InvalidArgument("k_factor must be positive");
  if (!std::isfinite(r_init)) throw InvalidArgument("r_init must be finite");
}

double update_delta(double r_i, double r_j, Outcome w, const ClassicConfig& cfg) {
  return cfg.k_factor * (w.value() - win_prob(r_i, r_j, cfg.scale));
}

std::pair<double, double> update_pair(double r_i, double r_j, Outcome w, const ClassicConfig& cfg) {
  const double d_i = update_delta(r_i, r_j, w, cfg);
  const double d_j = cfg.k_factor * (w.swapped().value() - win_prob(r_j, r_i, cfg.scale));
  return {r_i + d_i, r_j + d_j};
}

namespace {

void sequential_pass(std::span<const IndexedRecord> records, const ClassicConfig& cfg,
                     std::vector<double>& ratings) {
  const double c = cfg.scale.value();
  const double k = cfg.k_factor;
  for (const auto& r : records) {
    double& a = ratings[r.first];
    double& b = ratings[r.second];
    const double p = sigmoid(c * (a - b));
    const double q = sigmoid(c * (b - a));
    const double na = a + k * (r.outcome - p);
    const double nb = b + k * ((1.0 - r.outcome) - q);
    a = na;
    b = nb;
  }
}

}  // namespace

RatingVector run_pass(const Dataset& dataset, const ClassicConfig& cfg) {
  cfg.validate();
  dataset.require_well_formed();
  std::vector<double> ratings(dataset.n_models(), cfg.r_init);
  sequential_pass(dataset.indexed(), cfg, ratings);
  return {dataset.models(), std::move(ratings), Anchor::Initial};
}

ShuffleSummary shuffled_mean(const Dataset& dataset, const ClassicConfig& cfg,
                             std::size_t n_shuffles, std::uint64_t seed) {
  cfg.validate();
  dataset.require_well_formed();
  if (n_shuffles < 1) throw InvalidArgument("n_shuffles must be at least 1");

  const std::size_t n = dataset.n_models();
  std::vector<IndexedRecord> order(dataset.canonical().begin(), dataset.canonical().end());
  std::vector<double> sum(n, 0.0);
  std::vector<double> lo(n, std::numeric_limits<double>::infinity());
  std::vector<double> hi(n, -std::numeric_limits<double>::infinity());
  std::vector<double> ratings(n);
  std::vector<std::vector<double>> finals;
  finals.reserve(n_shuffles);

  Rng rng(seed);
  for (std::size_t s = 0; s < n_shuffles; ++s) {
    // each permutation starts from the canonical order
    std::copy(dataset.canonical().begin(), dataset.canonical().end(), order.begin());
    rng.shuffle(std::span<IndexedRecord>(order));
    std::fill(ratings.begin(), ratings.end(), cfg.r_init);
    sequential_pass(order, cfg, ratings);
    for (std::size_t m = 0; m < n; ++m) {
      sum[m] += ratings[m];
      lo[m] = std::min(lo[m], ratings[m]);
      hi[m] = std::max(hi[m], ratings[m]);
    }
    finals.push_back(ratings);
  }

  ShuffleSummary out;
  out.n_shuffles = n_shuffles;
  out.seed = seed;
  out.mean = {dataset.models(), std::vector<double>(n), Anchor::Initial};
  out.std.assign(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    const double mean = sum[m] / static_cast<double>(n_shuffles);
    double ss = 0.0;
    for (const auto& f : finals) ss += (f[m] - mean) * (f[m] - mean);
    out.mean.values[m] = std::clamp(mean, lo[m], hi[m]);
    out.std[m] = std::sqrt(ss / static_cast<double>(n_shuffles));
  }
  out.min = std::move(lo);
  out.max = std::move(hi);
  return out;
}

}  // namespace stablearena::classic
