#include "stablearena/amelo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "stablearena/melo.hpp"
#include "stablearena/random.hpp"

namespace stablearena::amelo {

double AbilityVector::at(const AnnotatorId& id) const {
  for (std::size_t i = 0; i < annotators.size(); ++i) {
    if (annotators[i] == id) return values[i];
  }
  throw InvalidArgument("no ability for annotator '" + id.str() + "'");
}

RatingVector JointFitResult::scaled_ratings() const {
  RatingVector out = ratings;
  if (abilities.size() == 0) return out;
  const double mean =
      std::accumulate(abilities.values.begin(), abilities.values.end(), 0.0) /
      static_cast<double>(abilities.size());
  for (auto& v : out.values) v *= mean;
  return out;
}

double win_prob_annotator(double r_i, double r_j, double theta) {
  return sigmoid(theta * (r_i - r_j));
}

namespace {

std::vector<double> aligned_abilities(const AbilityVector& abilities, const Dataset& dataset) {
  if (abilities.annotators.size() != abilities.values.size()) {
    throw InvalidArgument("ability vector: annotators and values differ in length");
  }
  if (abilities.annotators == dataset.annotators()) return abilities.values;
  std::unordered_map<AnnotatorId, double> lookup;
  for (std::size_t i = 0; i < abilities.size(); ++i) lookup[abilities.annotators[i]] = abilities.values[i];
  std::vector<double> out(dataset.n_annotators());
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto it = lookup.find(dataset.annotators()[k]);
    if (it == lookup.end()) {
      throw InvalidArgument("no ability for annotator '" + dataset.annotators()[k].str() + "'");
    }
    out[k] = it->second;
  }
  return out;
}

// ln L and optionally both gradient blocks, canonical order.
double evaluate(std::span<const double> r, std::span<const double> theta,
                std::span<const IndexedRecord> records, std::span<double> grad_r,
                std::span<double> grad_theta) {
  const bool want = !grad_r.empty();
  if (want) {
    std::fill(grad_r.begin(), grad_r.end(), 0.0);
    std::fill(grad_theta.begin(), grad_theta.end(), 0.0);
  }
  double ll = 0.0;
  for (const auto& rec : records) {
    const double diff = r[rec.first] - r[rec.second];
    const double t = theta[rec.annotator];
    const double p = sigmoid(t * diff);
    ll += rec.outcome * clamped_log(p) + (1.0 - rec.outcome) * clamped_log(1.0 - p);
    if (want) {
      const double resid = residual(rec.outcome, t * diff);
      grad_r[rec.first] += t * resid;
      grad_r[rec.second] -= t * resid;
      grad_theta[rec.annotator] += diff * resid;
    }
  }
  return ll;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double log_likelihood_joint(const RatingVector& ratings, const AbilityVector& abilities,
                            const Dataset& dataset) {
  dataset.require_well_formed();
  const auto r = stablearena::detail::aligned_ratings(ratings, dataset);
  const auto t = aligned_abilities(abilities, dataset);
  return evaluate(r, t, dataset.canonical(), {}, {});
}

JointGradient gradients_joint(const RatingVector& ratings, const AbilityVector& abilities,
                              const Dataset& dataset) {
  dataset.require_well_formed();
  const auto r = stablearena::detail::aligned_ratings(ratings, dataset);
  const auto t = aligned_abilities(abilities, dataset);
  JointGradient g{std::vector<double>(r.size()), std::vector<double>(t.size())};
  evaluate(r, t, dataset.canonical(), g.ratings, g.abilities);
  return g;
}

AbilityVector normalize(const AbilityVector& abilities) {
  const double sum = std::accumulate(abilities.values.begin(), abilities.values.end(), 0.0);
  if (!(std::abs(sum) >= 1e-12)) {
    throw DegenerateNormalization("ability sum " + std::to_string(sum) + " is too close to zero");
  }
  AbilityVector out = abilities;
  for (auto& v : out.values) v /= sum;
  return out;
}

namespace {

// Working state in mean-annotator units: scaled = R / M, weight = theta * M.
struct Params {
  std::vector<double> scaled;
  std::vector<double> weight;
};

// Rescales so the weights average 1 (abilities sum to 1), negating both
// blocks first when the sum is negative.
void normalize_params(Params& p, std::size_t epoch) {
  const double m = static_cast<double>(p.weight.size());
  double s = std::accumulate(p.weight.begin(), p.weight.end(), 0.0) / m;
  if (!(std::abs(s) >= 1e-12)) {
    throw DegenerateNormalization("ability sum collapsed to " + std::to_string(s) +
                                  " at epoch " + std::to_string(epoch));
  }
  if (s < 0.0) {
    for (auto& v : p.scaled) v = -v;
    for (auto& v : p.weight) v = -v;
    s = -s;
  }
  for (auto& v : p.weight) v /= s;
}

Params initial_params(const Dataset& dataset, const JointInit& init) {
  const std::size_t n = dataset.n_models();
  const std::size_t m = dataset.n_annotators();
  Params p{std::vector<double>(n, 0.0), std::vector<double>(m, 1.0)};
  switch (init.kind) {
    case JointInit::Kind::Default:
      break;
    case JointInit::Kind::Random: {
      Rng rng(init.seed);
      for (auto& v : p.scaled) v = rng.normal();
      // random orientation, log-normal magnitudes: the sum never collapses
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      for (auto& v : p.weight) v = sign * std::exp(0.5 * rng.normal());
      break;
    }
    case JointInit::Kind::Warm: {
      std::unordered_map<ModelId, double> prev_r;
      std::unordered_map<AnnotatorId, double> prev_t;
      if (init.ratings) {
        for (std::size_t i = 0; i < init.ratings->size(); ++i) {
          prev_r[init.ratings->models[i]] = init.ratings->values[i];
        }
      }
      if (init.abilities) {
        for (std::size_t i = 0; i < init.abilities->size(); ++i) {
          prev_t[init.abilities->annotators[i]] = init.abilities->values[i];
        }
      }
      // carried-over abilities in natural units, new annotators at their mean
      std::vector<double> theta(m, 0.0);
      std::vector<char> known(m, 0);
      double known_sum = 0.0;
      std::size_t known_count = 0;
      for (std::size_t k = 0; k < m; ++k) {
        auto it = prev_t.find(dataset.annotators()[k]);
        if (it != prev_t.end() && std::isfinite(it->second)) {
          theta[k] = it->second;
          known[k] = 1;
          known_sum += it->second;
          ++known_count;
        }
      }
      const double fill = known_count > 0 ? known_sum / static_cast<double>(known_count)
                                          : 1.0 / static_cast<double>(m);
      for (std::size_t k = 0; k < m; ++k) {
        if (!known[k]) theta[k] = fill;
      }
      // natural -> working units keeps every product theta * R
      const double md = static_cast<double>(m);
      for (std::size_t k = 0; k < m; ++k) p.weight[k] = theta[k] * md;
      for (std::size_t i = 0; i < n; ++i) {
        auto it = prev_r.find(dataset.models()[i]);
        p.scaled[i] = (it != prev_r.end() && std::isfinite(it->second)) ? it->second / md : 0.0;
      }
      // renormalize along the gauge orbit so the likelihood is unchanged
      double s = std::accumulate(p.weight.begin(), p.weight.end(), 0.0) / md;
      if (std::abs(s) >= 1e-12) {
        for (auto& v : p.weight) v /= s;
        for (auto& v : p.scaled) v *= s;
      } else {
        std::fill(p.weight.begin(), p.weight.end(), 1.0);
      }
      break;
    }
  }
  return p;
}

}  // namespace

JointFitResult fit_joint(const Dataset& dataset, const OptimConfig& cfg, const JointOptions& options) {
  cfg.validate();
  dataset.require_well_formed();
  const std::size_t n = dataset.n_models();
  const std::size_t m = dataset.n_annotators();
  if (n < 2) throw InvalidArgument("fit_joint needs at least 2 models");
  const auto a_counts = dataset.annotator_counts();
  for (std::size_t k = 0; k < m; ++k) {
    if (a_counts[k] == 0) {
      throw InvalidArgument("annotator '" + dataset.annotators()[k].str() + "' has no records");
    }
  }
  const auto m_counts = dataset.model_counts();
  const auto records = dataset.canonical();
  const auto comps = comparison_components(dataset);
  const double md = static_cast<double>(m);

  JointFitResult out;
  if (comps.count > 1) {
    out.warnings.push_back(std::to_string(comps.count) +
                           " components; cross-component comparisons are meaningless");
  }

  Params p = initial_params(dataset, options.init);
  if (options.normalize) normalize_params(p, 0);

  std::vector<double> step_r(n), step_t(m);
  for (std::size_t i = 0; i < n; ++i) {
    step_r[i] = cfg.learning_rate / static_cast<double>(std::max<std::size_t>(1, m_counts[i]));
  }
  for (std::size_t k = 0; k < m; ++k) {
    step_t[k] = cfg.learning_rate / static_cast<double>(a_counts[k]);
  }

  std::vector<double> g_r(n), g_t(m);
  std::vector<double> natural_r(n), natural_t(m);
  auto eval = [&](std::size_t epoch) {
    double ll = evaluate(p.scaled, p.weight, records, g_r, g_t);
    if (cfg.ridge > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        ll -= 0.5 * cfg.ridge * p.scaled[i] * p.scaled[i];
        g_r[i] -= cfg.ridge * p.scaled[i];
      }
    }
    if (!std::isfinite(ll)) {
      throw DivergenceError("log-likelihood became non-finite at epoch " + std::to_string(epoch),
                            epoch);
    }
    if (max_abs(p.scaled) > melo::kDivergenceBound) {
      throw DivergenceError("ratings exceeded " + std::to_string(melo::kDivergenceBound) +
                                " natural units at epoch " + std::to_string(epoch) +
                                "; the MLE does not exist for these data",
                            epoch);
    }
    out.grad_norm = std::max(max_abs(g_r), max_abs(g_t));
    return ll;
  };

  eval(0);
  out.loss_trace.reserve(cfg.epochs);
  for (std::size_t epoch = 1; epoch <= cfg.epochs && out.grad_norm > cfg.grad_tol; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) p.scaled[i] += step_r[i] * g_r[i];
    for (std::size_t k = 0; k < m; ++k) p.weight[k] += step_t[k] * g_t[k];
    if (options.normalize) normalize_params(p, epoch);
    const double ll = eval(epoch);
    out.loss_trace.push_back(-ll);
    out.epochs_run = epoch;
    if (options.on_epoch) {
      for (std::size_t i = 0; i < n; ++i) natural_r[i] = p.scaled[i] * md;
      for (std::size_t k = 0; k < m; ++k) natural_t[k] = p.weight[k] / md;
      options.on_epoch(epoch, natural_r, natural_t);
    }
  }
  out.converged = out.grad_norm <= cfg.grad_tol;

  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = p.scaled[i] * md;
  melo::detail::center_components(r, comps);
  std::vector<double> theta(m);
  for (std::size_t k = 0; k < m; ++k) theta[k] = p.weight[k] / md;
  out.ratings = {dataset.models(), std::move(r), Anchor::MeanZero};
  out.abilities = {dataset.annotators(), std::move(theta)};
  return out;
}

}  // namespace stablearena::amelo
