#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stablearena/core.hpp"

namespace stablearena::melo {

// Ratings beyond this many natural units (c * |R|) mean the MLE does not exist.
inline constexpr double kDivergenceBound = 50.0;

struct FitResult {
  RatingVector ratings;
  std::vector<double> loss_trace;  // negative log-likelihood after each epoch
  bool converged = false;
  double grad_norm = 0.0;  // final gradient max-norm
  std::size_t epochs_run = 0;
  std::vector<std::string> warnings;
};

struct FitOptions {
  std::optional<std::vector<double>> init;  // registry order; zeros when absent
  EpochCallback on_epoch;
};

// Sum over records of W ln P(R_i, R_j) + (1 - W) ln P(R_j, R_i).
double log_likelihood(const RatingVector& ratings, const Dataset& dataset, ScaleConstant c);

// d ln L / d R_n = sum over battles of n of c (W_nj - P(R_n, R_j)).
std::vector<double> gradient(const RatingVector& ratings, const Dataset& dataset, ScaleConstant c);

// Negative semidefinite with zero row sums: off-diagonal (n, j) is
// delta_nj c^2 P (1 - P), delta_nj the number of battles between n and j.
Eigen::MatrixXd hessian(const RatingVector& ratings, const Dataset& dataset, ScaleConstant c);

// Full-batch gradient ascent from zero ratings. Each rating moves by
// learning_rate times its gradient divided by c^2 and by the number of
// battles it took part in, so the natural-unit path does not depend on c.
// Stops after cfg.epochs or once the gradient max-norm falls below grad_tol.
// Output is mean-centered per connected component.
FitResult fit_gd(const Dataset& dataset, const OptimConfig& cfg,
                 ScaleConstant c = ScaleConstant::natural(), const FitOptions& options = {});

// Damped Newton ascent with the first model held at 0, then mean-centered.
// With a ridge penalty the optimum is unique without anchoring and the full
// system is solved instead.
// Throws SingularHessian on a disconnected comparison graph and
// DivergenceError when ratings leave the finite-MLE region.
FitResult fit_newton(const Dataset& dataset, const OptimConfig& cfg,
                     ScaleConstant c = ScaleConstant::natural(), const FitOptions& options = {});

// Newton direction at `ratings` on the anchored subspace (first model fixed),
// padded with 0 for the anchor; unanchored when ridge > 0. Zero when the
// gradient is zero.
std::vector<double> newton_direction(const RatingVector& ratings, const Dataset& dataset,
                                     ScaleConstant c, double ridge = 0.0);

// 1000 + (400 / ln 10) * value.
std::vector<double> to_display(const RatingVector& ratings);
double to_display(double value);

// Min-max scaling to [0, 1]; all 0.5 when every value is equal.
std::vector<double> min_max_normalize(std::span<const double> values);

namespace detail {

// Accumulates ln L (with the ridge term) and, when `grad` is non-empty, its
// gradient into freshly zeroed storage. Canonical record order throughout.
double evaluate(std::span<const double> ratings, std::span<const IndexedRecord> records,
                double c, double ridge, std::span<double> grad);

void center_components(std::span<double> ratings, const Components& comps);

}  // namespace detail

}  // namespace stablearena::melo
