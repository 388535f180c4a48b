#include "stablearena/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "stablearena/melo.hpp"
#include "stablearena/random.hpp"

namespace stablearena::experiment {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Elo:
      return "elo";
    case Method::MElo:
      return "melo";
    case Method::AmElo:
      return "amelo";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  std::erase(s, '-');
  if (s == "elo") return Method::Elo;
  if (s == "melo") return Method::MElo;
  if (s == "amelo") return Method::AmElo;
  throw InvalidArgument("unknown method '" + std::string(name) + "' (expected elo, melo or amelo)");
}

MethodFit fit_method(Method method, const Dataset& dataset, const MethodConfig& cfg) {
  MethodFit out;
  out.method = method;
  switch (method) {
    case Method::Elo: {
      auto summary = classic::shuffled_mean(dataset, cfg.classic, cfg.shuffles, cfg.seed);
      out.ratings = summary.mean;
      const double c = cfg.classic.scale.value();
      for (auto& v : out.ratings.values) v = c * (v - cfg.classic.r_init);
      out.ratings.anchor = Anchor::MeanZero;
      break;
    }
    case Method::MElo: {
      auto fit = melo::fit_gd(dataset, cfg.optim);
      out.ratings = std::move(fit.ratings);
      out.loss_trace = std::move(fit.loss_trace);
      out.warnings = std::move(fit.warnings);
      break;
    }
    case Method::AmElo: {
      amelo::JointOptions options;
      options.normalize = cfg.normalize;
      auto fit = amelo::fit_joint(dataset, cfg.optim, options);
      out.ratings = std::move(fit.ratings);
      out.abilities = std::move(fit.abilities);
      out.loss_trace = std::move(fit.loss_trace);
      out.warnings = std::move(fit.warnings);
      break;
    }
  }
  return out;
}

std::vector<double> predict(const MethodFit& fit, const Dataset& data) {
  std::unordered_map<ModelId, double> r;
  for (std::size_t i = 0; i < fit.ratings.size(); ++i) r[fit.ratings.models[i]] = fit.ratings.values[i];
  std::unordered_map<AnnotatorId, double> theta;
  double mean_theta = 1.0;
  if (fit.abilities) {
    const auto& a = *fit.abilities;
    for (std::size_t k = 0; k < a.size(); ++k) theta[a.annotators[k]] = a.values[k];
    if (a.size() > 0) {
      mean_theta = std::accumulate(a.values.begin(), a.values.end(), 0.0) / static_cast<double>(a.size());
    }
  }
  auto rating = [&](const ModelId& id) {
    auto it = r.find(id);
    return it == r.end() ? 0.0 : it->second;
  };
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& rec : data.records()) {
    double t = 1.0;
    if (fit.abilities) {
      auto it = theta.find(rec.annotator);
      t = it == theta.end() ? mean_theta : it->second;
    }
    out.push_back(sigmoid(t * (rating(rec.first) - rating(rec.second))));
  }
  return out;
}

metrics::Ranking ranking(const MethodFit& fit) { return metrics::rank(fit.ratings); }

namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace

std::vector<HoldoutSummary> holdout_evaluation(const Dataset& dataset,
                                               const std::vector<Method>& methods,
                                               const MethodConfig& cfg, std::size_t n_splits,
                                               double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train fraction must lie in (0, 1)");
  }
  dataset.require_well_formed();
  std::vector<HoldoutSummary> out;
  for (auto m : methods) out.push_back({m, {}, {}});

  const std::size_t n = dataset.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  for (std::size_t split = 0; split < n_splits; ++split) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(mix64(seed) + split);
    rng.shuffle(std::span<std::size_t>(idx));
    std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::sort(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    std::vector<ComparisonRecord> train, test;
    for (std::size_t i = 0; i < n; ++i) {
      (i < n_train ? train : test).push_back(dataset.records()[idx[i]]);
    }
    const Dataset train_ds(std::move(train));
    const Dataset test_ds(std::move(test));
    std::vector<double> outcomes;
    for (const auto& rec : test_ds.records()) outcomes.push_back(rec.outcome.value());

    for (std::size_t j = 0; j < methods.size(); ++j) {
      const auto fit = fit_method(methods[j], train_ds, cfg);
      const auto p = predict(fit, test_ds);
      out[j].mse.push_back(metrics::mse(p, outcomes));
      out[j].auc.push_back(metrics::auc(p, outcomes));
    }
  }
  for (auto& s : out) {
    std::tie(s.mse_mean, s.mse_std) = mean_std(s.mse);
    std::tie(s.auc_mean, s.auc_std) = mean_std(s.auc);
  }
  return out;
}

std::vector<double> default_ratios() {
  std::vector<double> r;
  for (int i = 1; i <= 10; ++i) r.push_back(0.05 * i);
  return r;
}

SweepCell sweep_cell(const Dataset& dataset, const std::vector<Method>& methods,
                     const std::vector<MethodFit>& clean, perturb::Strategy strategy, double ratio,
                     std::uint64_t seed, const MethodConfig& cfg) {
  if (clean.size() != methods.size()) throw InvalidArgument("one clean fit per method expected");
  perturb::PerturbationPlan plan;
  plan.targets = perturb::sample_targets(dataset, ratio, seed);
  plan.strategy = strategy;
  plan.seed = seed;
  const auto perturbed = perturb::apply(dataset, plan);

  SweepCell cell{strategy, ratio, seed, {}, {}, {}};
  for (std::size_t j = 0; j < methods.size(); ++j) {
    const auto fit = fit_method(methods[j], perturbed.dataset, cfg);
    cell.consistency.push_back(metrics::ranking_consistency(ranking(fit), ranking(clean[j])));
    if (fit.abilities) {
      cell.f1_eps0 = metrics::detection_f1(*fit.abilities, plan.targets, 0.0);
      cell.f1_eps005 = metrics::detection_f1(*fit.abilities, plan.targets, 0.005);
    }
  }
  return cell;
}

std::vector<SweepCell> perturbation_sweep(const Dataset& dataset, const SweepConfig& sweep,
                                          const MethodConfig& cfg) {
  std::vector<MethodFit> clean;
  for (auto m : sweep.methods) clean.push_back(fit_method(m, dataset, cfg));
  const auto ratios = sweep.ratios.empty() ? default_ratios() : sweep.ratios;
  std::vector<SweepCell> out;
  for (auto strategy : sweep.strategies) {
    for (double ratio : ratios) {
      for (auto seed : sweep.seeds) {
        out.push_back(sweep_cell(dataset, sweep.methods, clean, strategy, ratio, seed, cfg));
      }
    }
  }
  return out;
}

ConsistencyTrace consistency_trace(const Dataset& dataset, const std::vector<std::uint64_t>& seeds,
                                   const OptimConfig& optim, bool normalize) {
  if (seeds.size() < 2) throw InvalidArgument("consistency trace needs at least 2 runs");
  ConsistencyTrace out;
  std::vector<std::vector<metrics::Ranking>> per_run;
  for (auto seed : seeds) {
    amelo::JointOptions options;
    options.normalize = normalize;
    options.init.kind = amelo::JointInit::Kind::Random;
    options.init.seed = seed;
    std::vector<metrics::Ranking> trace;
    trace.reserve(optim.epochs);
    options.on_epoch = [&](std::size_t, std::span<const double> r, std::span<const double>) {
      trace.push_back(metrics::rank(dataset.models(), r));
    };
    auto fit = amelo::fit_joint(dataset, optim, options);
    out.final_rankings.push_back(metrics::rank(fit.ratings));
    out.loss.push_back(std::move(fit.loss_trace));
    per_run.push_back(std::move(trace));
  }
  std::size_t epochs = 0;
  for (const auto& t : per_run) epochs = std::max(epochs, t.size());
  std::vector<metrics::Ranking> at_epoch(per_run.size());
  for (std::size_t e = 0; e < epochs; ++e) {
    for (std::size_t k = 0; k < per_run.size(); ++k) {
      at_epoch[k] = e < per_run[k].size() ? per_run[k][e] : out.final_rankings[k];
    }
    out.consistency.push_back(metrics::multi_run_consistency(at_epoch));
  }
  return out;
}

}  // namespace stablearena::experiment
