#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stablearena/amelo.hpp"
#include "stablearena/classic.hpp"
#include "stablearena/core.hpp"
#include "stablearena/metrics.hpp"
#include "stablearena/perturb.hpp"

namespace stablearena::experiment {

enum class Method { Elo, MElo, AmElo };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);  // "elo", "melo", "amelo"

struct MethodConfig {
  OptimConfig optim;
  classic::ClassicConfig classic;
  std::size_t shuffles = 1000;  // Elo: ratings are the mean over shuffled passes
  std::uint64_t seed = 0;       // Elo shuffles
  bool normalize = true;        // am-ELO ability normalization
};

// Ratings in natural units for every method. Elo ratings are converted with
// C * (R - r_init), so P = sigmoid(R_i - R_j) holds for all three.
struct MethodFit {
  Method method = Method::MElo;
  RatingVector ratings;
  std::optional<amelo::AbilityVector> abilities;  // am-ELO only
  std::vector<double> loss_trace;
  std::vector<std::string> warnings;
};

MethodFit fit_method(Method method, const Dataset& dataset, const MethodConfig& cfg);

// Win probability of `first` for every record of `data`, ingestion order.
// Models missing from the fit get rating 0 and unseen annotators the mean
// ability.
std::vector<double> predict(const MethodFit& fit, const Dataset& data);

// Ranking of the fit, over the models of the fit.
metrics::Ranking ranking(const MethodFit& fit);

struct HoldoutSummary {
  Method method;
  std::vector<double> mse;  // per split
  std::vector<double> auc;
  double mse_mean = 0.0, mse_std = 0.0;
  double auc_mean = 0.0, auc_std = 0.0;
};

// Seeded record-level splits: fit on train_fraction of the records, score
// MSE and AUC on the rest. Standard deviations are sample (n - 1) based.
std::vector<HoldoutSummary> holdout_evaluation(const Dataset& dataset,
                                               const std::vector<Method>& methods,
                                               const MethodConfig& cfg, std::size_t n_splits = 10,
                                               double train_fraction = 0.8,
                                               std::uint64_t seed = 0);

struct SweepCell {
  perturb::Strategy strategy;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> consistency;  // per method, perturbed vs clean ranking
  std::optional<double> f1_eps0;    // when am-ELO is among the methods
  std::optional<double> f1_eps005;
};

struct SweepConfig {
  std::vector<Method> methods{Method::Elo, Method::MElo, Method::AmElo};
  std::vector<perturb::Strategy> strategies{perturb::Strategy::Random, perturb::Strategy::Equal,
                                            perturb::Strategy::Flip, perturb::Strategy::Mixed};
  std::vector<double> ratios;  // empty: 0.05, 0.10, ..., 0.50
  std::vector<std::uint64_t> seeds{0};
};

std::vector<double> default_ratios();

// Fits each method on the clean dataset once, then for every
// (strategy, ratio, seed) perturbs a sampled target set and refits.
std::vector<SweepCell> perturbation_sweep(const Dataset& dataset, const SweepConfig& sweep,
                                          const MethodConfig& cfg);

// One cell against precomputed clean fits (same order as `methods`).
SweepCell sweep_cell(const Dataset& dataset, const std::vector<Method>& methods,
                     const std::vector<MethodFit>& clean, perturb::Strategy strategy, double ratio,
                     std::uint64_t seed, const MethodConfig& cfg);

struct ConsistencyTrace {
  std::vector<double> consistency;              // per epoch, across runs
  std::vector<std::vector<double>> loss;        // per run, per epoch
  std::vector<metrics::Ranking> final_rankings;  // per run
};

// am-ELO from `seeds.size()` random initializations, tracking the
// multi-run consistency of the rankings after every epoch. Runs that stop
// early keep their last ranking for the remaining epochs.
ConsistencyTrace consistency_trace(const Dataset& dataset, const std::vector<std::uint64_t>& seeds,
                                   const OptimConfig& optim, bool normalize);

}  // namespace stablearena::experiment
