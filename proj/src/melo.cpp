#include "stablearena/melo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stablearena::melo {

namespace detail {

double evaluate(std::span<const double> ratings, std::span<const IndexedRecord> records,
                double c, double ridge, std::span<double> grad) {
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  double ll = 0.0;
  for (const auto& r : records) {
    const double p = sigmoid(c * (ratings[r.first] - ratings[r.second]));
    ll += r.outcome * clamped_log(p) + (1.0 - r.outcome) * clamped_log(1.0 - p);
    if (want_grad) {
      const double g = c * residual(r.outcome, c * (ratings[r.first] - ratings[r.second]));
      grad[r.first] += g;
      grad[r.second] -= g;
    }
  }
  if (ridge > 0.0) {
    for (std::size_t n = 0; n < ratings.size(); ++n) {
      ll -= 0.5 * ridge * ratings[n] * ratings[n];
      if (want_grad) grad[n] -= ridge * ratings[n];
    }
  }
  return ll;
}

void center_components(std::span<double> ratings, const Components& comps) {
  std::vector<double> sum(comps.count, 0.0);
  std::vector<std::size_t> size(comps.count, 0);
  for (std::size_t n = 0; n < ratings.size(); ++n) {
    sum[comps.label[n]] += ratings[n];
    ++size[comps.label[n]];
  }
  for (std::size_t n = 0; n < ratings.size(); ++n) {
    ratings[n] -= sum[comps.label[n]] / static_cast<double>(size[comps.label[n]]);
  }
}

}  // namespace detail

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void check_divergence(double ll, std::span<const double> ratings, double c, std::size_t epoch) {
  if (!std::isfinite(ll)) {
    throw DivergenceError("log-likelihood became non-finite at epoch " + std::to_string(epoch),
                          epoch);
  }
  if (c * max_abs(ratings) > kDivergenceBound) {
    throw DivergenceError(
        "ratings exceeded " + std::to_string(kDivergenceBound) +
            " natural units at epoch " + std::to_string(epoch) +
            "; the data look separable and the MLE does not exist (set a ridge penalty)",
        epoch);
  }
}

std::vector<std::string> structural_warnings(const Dataset& dataset, const Components& comps,
                                             double ridge) {
  std::vector<std::string> warnings;
  if (comps.count > 1) {
    warnings.push_back(std::to_string(comps.count) +
                       " components fitted independently; cross-component comparisons are "
                       "meaningless");
  }
  if (ridge == 0.0 && !mle_exists(dataset)) {
    warnings.push_back(
        "separable data: some model never lost (or never won) within its component, so the "
        "MLE does not exist and ratings are not converged");
  }
  return warnings;
}

std::vector<double> initial_ratings(const Dataset& dataset, const FitOptions& options) {
  if (!options.init) return std::vector<double>(dataset.n_models(), 0.0);
  if (options.init->size() != dataset.n_models()) {
    throw InvalidArgument("initial ratings do not match the model registry");
  }
  return *options.init;
}

}  // namespace

double log_likelihood(const RatingVector& ratings, const Dataset& dataset, ScaleConstant c) {
  dataset.require_well_formed();
  const auto r = stablearena::detail::aligned_ratings(ratings, dataset);
  return detail::evaluate(r, dataset.canonical(), c.value(), 0.0, {});
}

std::vector<double> gradient(const RatingVector& ratings, const Dataset& dataset, ScaleConstant c) {
  dataset.require_well_formed();
  const auto r = stablearena::detail::aligned_ratings(ratings, dataset);
  std::vector<double> g(r.size());
  detail::evaluate(r, dataset.canonical(), c.value(), 0.0, g);
  return g;
}

namespace {

Eigen::MatrixXd hessian_raw(std::span<const double> r, std::span<const IndexedRecord> records,
                            std::size_t n, double c, double ridge) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& rec : records) {
    const double p = sigmoid(c * (r[rec.first] - r[rec.second]));
    const double a = c * c * p * (1.0 - p);
    const auto i = static_cast<Eigen::Index>(rec.first);
    const auto j = static_cast<Eigen::Index>(rec.second);
    h(i, i) -= a;
    h(j, j) -= a;
    h(i, j) += a;
    h(j, i) += a;
  }
  if (ridge > 0.0) h.diagonal().array() -= ridge;
  return h;
}

// Solves (-H_rr) d = g_r on the subspace with the first rating fixed. A
// ridge penalty removes the shift gauge, so the full system is solved then.
std::optional<std::vector<double>> newton_step(const Eigen::MatrixXd& h, std::span<const double> g,
                                               bool anchored) {
  const auto n = static_cast<Eigen::Index>(g.size());
  std::vector<double> step(g.size(), 0.0);
  const Eigen::Index skip = anchored ? 1 : 0;
  if (n - skip < 1) return step;
  const Eigen::MatrixXd neg = -h.bottomRightCorner(n - skip, n - skip);
  Eigen::VectorXd rhs(n - skip);
  for (Eigen::Index i = skip; i < n; ++i) rhs(i - skip) = g[static_cast<std::size_t>(i)];
  Eigen::LLT<Eigen::MatrixXd> llt(neg);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd d = llt.solve(rhs);
  for (Eigen::Index i = skip; i < n; ++i) step[static_cast<std::size_t>(i)] = d(i - skip);
  return step;
}

}  // namespace

Eigen::MatrixXd hessian(const RatingVector& ratings, const Dataset& dataset, ScaleConstant c) {
  dataset.require_well_formed();
  const auto r = stablearena::detail::aligned_ratings(ratings, dataset);
  return hessian_raw(r, dataset.canonical(), dataset.n_models(), c.value(), 0.0);
}

std::vector<double> newton_direction(const RatingVector& ratings, const Dataset& dataset,
                                     ScaleConstant c, double ridge) {
  dataset.require_well_formed();
  const auto r = stablearena::detail::aligned_ratings(ratings, dataset);
  std::vector<double> g(r.size());
  detail::evaluate(r, dataset.canonical(), c.value(), ridge, g);
  if (max_abs(g) == 0.0) return std::vector<double>(r.size(), 0.0);
  const auto h = hessian_raw(r, dataset.canonical(), r.size(), c.value(), ridge);
  auto step = newton_step(h, g, ridge == 0.0);
  if (!step) throw SingularHessian("restricted Hessian is singular; fit each component separately");
  return *step;
}

FitResult fit_gd(const Dataset& dataset, const OptimConfig& cfg, ScaleConstant c,
                 const FitOptions& options) {
  cfg.validate();
  dataset.require_well_formed();
  const std::size_t n = dataset.n_models();
  const auto comps = comparison_components(dataset);
  const auto records = dataset.canonical();
  const auto counts = dataset.model_counts();

  FitResult out;
  out.warnings = structural_warnings(dataset, comps, cfg.ridge);
  std::vector<double> r = initial_ratings(dataset, options);
  std::vector<double> g(n);
  std::vector<double> scale(n);
  for (std::size_t m = 0; m < n; ++m) {
    scale[m] = cfg.learning_rate /
               (static_cast<double>(std::max<std::size_t>(1, counts[m])) * c.value() * c.value());
  }

  double ll = detail::evaluate(r, records, c.value(), cfg.ridge, g);
  check_divergence(ll, r, c.value(), 0);
  out.grad_norm = max_abs(g);
  out.loss_trace.reserve(cfg.epochs);
  for (std::size_t epoch = 1; epoch <= cfg.epochs && out.grad_norm > cfg.grad_tol; ++epoch) {
    for (std::size_t m = 0; m < n; ++m) r[m] += scale[m] * g[m];
    ll = detail::evaluate(r, records, c.value(), cfg.ridge, g);
    check_divergence(ll, r, c.value(), epoch);
    out.loss_trace.push_back(-ll);
    out.grad_norm = max_abs(g);
    out.epochs_run = epoch;
    if (options.on_epoch) options.on_epoch(epoch, r);
  }
  out.converged = out.grad_norm <= cfg.grad_tol;

  detail::center_components(r, comps);
  out.ratings = {dataset.models(), std::move(r), Anchor::MeanZero};
  return out;
}

FitResult fit_newton(const Dataset& dataset, const OptimConfig& cfg, ScaleConstant c,
                     const FitOptions& options) {
  cfg.validate();
  dataset.require_well_formed();
  const std::size_t n = dataset.n_models();
  const auto comps = comparison_components(dataset);
  if (comps.count > 1) {
    throw SingularHessian(std::to_string(comps.count) +
                          " disconnected components make the restricted Hessian singular; "
                          "fit each component separately");
  }
  const auto records = dataset.canonical();

  FitResult out;
  out.warnings = structural_warnings(dataset, comps, cfg.ridge);
  std::vector<double> r = initial_ratings(dataset, options);
  if (cfg.ridge == 0.0 && n > 0) {
    for (std::size_t m = 1; m < n; ++m) r[m] -= r[0];
    r[0] = 0.0;
  }
  std::vector<double> g(n), trial(n), trial_g(n);

  double ll = detail::evaluate(r, records, c.value(), cfg.ridge, g);
  check_divergence(ll, r, c.value(), 0);
  out.grad_norm = max_abs(g);
  for (std::size_t epoch = 1; epoch <= cfg.epochs && out.grad_norm > cfg.grad_tol; ++epoch) {
    const auto h = hessian_raw(r, records, n, c.value(), cfg.ridge);
    const auto step = newton_step(h, g, cfg.ridge == 0.0);
    if (!step) throw SingularHessian("restricted Hessian is singular at epoch " + std::to_string(epoch));

    // backtrack until the objective does not decrease
    double t = 1.0;
    double trial_ll = ll;
    for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
      for (std::size_t m = 0; m < n; ++m) trial[m] = r[m] + t * (*step)[m];
      trial_ll = detail::evaluate(trial, records, c.value(), cfg.ridge, trial_g);
      if (std::isfinite(trial_ll) && trial_ll >= ll) break;
      // near the optimum the gain drops below rounding noise in ln L
      if (halvings == 0 && std::isfinite(trial_ll) && max_abs(trial_g) < max_abs(g) &&
          trial_ll >= ll - 1e-12 * std::max(1.0, std::abs(ll))) {
        break;
      }
    }
    if (!(trial_ll >= ll - 1e-12 * std::max(1.0, std::abs(ll)))) {
      // no ascent possible at machine precision
      break;
    }
    r.swap(trial);
    g.swap(trial_g);
    ll = trial_ll;
    check_divergence(ll, r, c.value(), epoch);
    out.loss_trace.push_back(-ll);
    out.grad_norm = max_abs(g);
    out.epochs_run = epoch;
    if (options.on_epoch) options.on_epoch(epoch, r);
  }
  out.converged = out.grad_norm <= cfg.grad_tol;

  detail::center_components(r, comps);
  out.ratings = {dataset.models(), std::move(r), Anchor::MeanZero};
  return out;
}

double to_display(double value) { return 1000.0 + (400.0 / std::numbers::ln10) * value; }

std::vector<double> to_display(const RatingVector& ratings) {
  std::vector<double> out;
  out.reserve(ratings.size());
  for (double v : ratings.values) out.push_back(to_display(v));
  return out;
}

std::vector<double> min_max_normalize(std::span<const double> values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double span = *hi - *lo;
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(span > 0.0 ? (v - *lo) / span : 0.5);
  return out;
}

}  // namespace stablearena::melo
