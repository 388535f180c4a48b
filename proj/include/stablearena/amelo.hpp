#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stablearena/core.hpp"

namespace stablearena::amelo {

// Per-annotator discrimination. Fitted abilities sum to 1.
struct AbilityVector {
  std::vector<AnnotatorId> annotators;
  std::vector<double> values;

  double at(const AnnotatorId& id) const;
  std::size_t size() const noexcept { return values.size(); }

  friend bool operator==(const AbilityVector&, const AbilityVector&) = default;
};

struct JointFitResult {
  RatingVector ratings;  // gauge fixed by the ability sum and mean-centering
  AbilityVector abilities;
  std::vector<double> loss_trace;  // negative log-likelihood after each epoch
  bool converged = false;
  double grad_norm = 0.0;
  std::size_t epochs_run = 0;
  std::vector<std::string> warnings;

  // Ratings times the mean ability: the scale an average annotator sees,
  // directly comparable with m-ELO natural units.
  RatingVector scaled_ratings() const;

  friend bool operator==(const JointFitResult&, const JointFitResult&) = default;
};

// 1 / (1 + exp(-theta (r_i - r_j))).
double win_prob_annotator(double r_i, double r_j, double theta);

double log_likelihood_joint(const RatingVector& ratings, const AbilityVector& abilities,
                            const Dataset& dataset);

struct JointGradient {
  std::vector<double> ratings;    // registry order
  std::vector<double> abilities;  // registry order
};

JointGradient gradients_joint(const RatingVector& ratings, const AbilityVector& abilities,
                              const Dataset& dataset);

// theta / sum(theta). Throws DegenerateNormalization when |sum| < 1e-12.
AbilityVector normalize(const AbilityVector& abilities);

struct JointInit {
  enum class Kind {
    Default,  // ratings 0, abilities 1/M
    Random,   // seeded: normal ratings; abilities a random common sign times
              // log-normal(0, 0.5) magnitudes (mean-annotator units)
    Warm,     // from a previous fit; new models at 0, new annotators at the mean ability
  };
  Kind kind = Kind::Default;
  std::uint64_t seed = 0;
  std::optional<RatingVector> ratings;
  std::optional<AbilityVector> abilities;
};

using JointEpochCallback = std::function<void(
    std::size_t epoch, std::span<const double> ratings, std::span<const double> abilities)>;

struct JointOptions {
  bool normalize = true;  // false reproduces the unnormalized diagnostic variant
  JointInit init;
  JointEpochCallback on_epoch;
};

// Simultaneous gradient ascent on ratings and abilities followed by the
// ability normalization after every epoch. If the ability sum turns negative
// the ratings and abilities are negated together before dividing, so the
// majority of ability mass stays positive.
//
// Steps are taken in mean-annotator units (ratings times 1/M, abilities
// times M) and each coordinate's gradient is divided by its record count.
// This leaves the likelihood and its fixed points unchanged and makes the
// learning rate independent of M and of the dataset size. With M = 1 the
// iteration is identical to melo::fit_gd with c = 1.
JointFitResult fit_joint(const Dataset& dataset, const OptimConfig& cfg,
                         const JointOptions& options = {});

}  // namespace stablearena::amelo
