#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "stablearena/amelo.hpp"
#include "stablearena/melo.hpp"
#include "stablearena/metrics.hpp"
#include "stablearena/perturb.hpp"
#include "stablearena/synthetic.hpp"

using namespace stablearena;
using namespace stablearena::amelo;
using testing::rec;

namespace {

RatingVector zeros(const Dataset& d) { return {d.models(), std::vector<double>(d.n_models(), 0.0)}; }

AbilityVector uniform(const Dataset& d, double v) { return {d.annotators(), std::vector<double>(d.n_annotators(), v)}; }

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("win_prob_annotator examples") {
  CHECK(win_prob_annotator(3.0, -2.0, 0.0) == 0.5);
  CHECK(win_prob_annotator(std::log(3.0), 0.0, 1.0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(win_prob_annotator(1.0, 0.0, -1.0) < 0.5);
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const double a = rng.normal() * 5, b = rng.normal() * 5, th = rng.normal();
    CHECK(std::abs(win_prob_annotator(a, b, th) + win_prob_annotator(b, a, th) - 1.0) <= 1e-12);
  }
}

TEST_CASE("ability is the maximum slope times four") {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const double theta = rng.uniform(-3, 3), r = rng.normal();
    const double h = 1e-5;
    const double slope = (win_prob_annotator(r + h, r, theta) - win_prob_annotator(r - h, r, theta)) / (2 * h);
    CHECK(std::abs(4 * slope - theta) <= 1e-6);
  }
}

TEST_CASE("log_likelihood_joint examples") {
  const Dataset empty({}, {ModelId("A"), ModelId("B")}, {AnnotatorId("k")});
  CHECK(log_likelihood_joint(zeros(empty), uniform(empty, 1.0), empty) == 0.0);

  for (double w : {0.0, 0.5, 1.0}) {
    const Dataset one({rec("A", "B", "k", w)});
    const RatingVector r{one.models(), {2.0, -1.0}};
    CHECK(log_likelihood_joint(r, uniform(one, 0.0), one) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  }

  const auto d = testing::random_dataset(5, 1, 100, 3);
  Rng rng(3);
  const RatingVector r{d.models(), testing::random_vector(5, rng)};
  CHECK(log_likelihood_joint(r, uniform(d, 1.0), d) == melo::log_likelihood(r, d, ScaleConstant(1.0)));

  const AbilityVector missing{{AnnotatorId("zz")}, {1.0}};
  CHECK_THROWS_AS(log_likelihood_joint(r, missing, d), InvalidArgument);
}

TEST_CASE("gradients_joint examples") {
  const Dataset one({rec("A", "B", "k", 1)});
  const auto g = gradients_joint(zeros(one), uniform(one, 1.0), one);
  CHECK(g.ratings == std::vector<double>{0.5, -0.5});
  CHECK(g.abilities == std::vector<double>{0.0});
}

TEST_CASE("negative ability reverses the per-sample rating gradient") {
  Rng rng(4);
  for (int t = 0; t < 1000; ++t) {
    const double theta = -rng.uniform(1e-3, 3.0);
    const double w = rng.uniform() < 0.5 ? 1.0 : 0.0;
    const Dataset one({rec("A", "B", "k", w)});
    const RatingVector r{one.models(), {rng.normal() * 3, rng.normal() * 3}};
    const auto g = gradients_joint(r, {one.annotators(), {theta}}, one);
    if (w == 1.0) {
      CHECK(g.ratings[0] < 0.0);  // the winner is pushed down
      CHECK(g.ratings[1] > 0.0);
    } else {
      CHECK(g.ratings[0] > 0.0);  // the loser is pushed up
      CHECK(g.ratings[1] < 0.0);
    }
  }
}

TEST_CASE("gradients_joint matches central differences in both blocks") {
  Rng rng(5);
  for (int inst = 0; inst < 50; ++inst) {
    const auto d = testing::random_dataset(2 + rng.below(6), 1 + rng.below(5), 30 + rng.below(100), 900 + inst);
    const auto r = testing::random_vector(d.n_models(), rng);
    auto t = testing::random_vector(d.n_annotators(), rng, 0.5);
    const auto g = gradients_joint({d.models(), r}, {d.annotators(), t}, d);

    auto f_r = [&](const std::vector<double>& v) {
      return log_likelihood_joint({d.models(), v}, {d.annotators(), t}, d);
    };
    auto f_t = [&](const std::vector<double>& v) {
      return log_likelihood_joint({d.models(), r}, {d.annotators(), v}, d);
    };
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      err = std::max(err, std::abs(g.ratings[i] - testing::central_difference(f_r, r, i)));
      scale = std::max(scale, std::abs(g.ratings[i]));
    }
    CHECK(err / scale <= 1e-6);
    err = scale = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      err = std::max(err, std::abs(g.abilities[k] - testing::central_difference(f_t, t, k)));
      scale = std::max(scale, std::abs(g.abilities[k]));
    }
    CHECK(err / scale <= 1e-6);
  }
}

TEST_CASE("frozen equal abilities reduce to m-ELO with c = 1/M") {
  const auto d = testing::random_dataset(5, 4, 120, 6);
  Rng rng(6);
  const RatingVector r{d.models(), testing::random_vector(5, rng)};
  const double inv = 1.0 / static_cast<double>(d.n_annotators());
  const auto g = gradients_joint(r, uniform(d, inv), d);
  const auto m = melo::gradient(r, d, ScaleConstant(inv));
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(g.ratings[i] == doctest::Approx(m[i]).epsilon(1e-12));
}

TEST_CASE("scale gauge") {
  const auto d = testing::random_dataset(6, 4, 200, 7);
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const auto r = testing::random_vector(6, rng);
    const auto th = testing::random_vector(4, rng);
    const double base = log_likelihood_joint({d.models(), r}, {d.annotators(), th}, d);
    for (double alpha : {-2.0, -1.0, 0.5, 3.0}) {
      auto ar = r;
      auto at = th;
      for (auto& x : ar) x *= alpha;
      for (auto& x : at) x /= alpha;
      CHECK(std::abs(log_likelihood_joint({d.models(), ar}, {d.annotators(), at}, d) - base) <= 1e-10);
    }
  }
  SUBCASE("exact for power-of-two factors") {
    const auto r = testing::random_vector(6, rng);
    const auto th = testing::random_vector(4, rng);
    const double base = log_likelihood_joint({d.models(), r}, {d.annotators(), th}, d);
    for (double alpha : {-2.0, -1.0, 0.5, 4.0}) {
      auto ar = r;
      auto at = th;
      for (auto& x : ar) x *= alpha;
      for (auto& x : at) x /= alpha;
      CHECK(log_likelihood_joint({d.models(), ar}, {d.annotators(), at}, d) == base);
    }
  }
}

TEST_CASE("normalize examples") {
  const std::vector<AnnotatorId> ids{AnnotatorId("a"), AnnotatorId("b"), AnnotatorId("c")};
  const auto same = normalize({ids, {0.2, 0.2, 0.6}});
  CHECK(same.values[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(same.values[2] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(normalize({ids, {2, 1, 1}}).values == std::vector<double>{0.5, 0.25, 0.25});
  CHECK_THROWS_AS(normalize({{AnnotatorId("a"), AnnotatorId("b")}, {1, -1}}), DegenerateNormalization);
}

TEST_CASE("fit_joint with one annotator is m-ELO") {
  const auto d = testing::random_dataset(6, 1, 300, 8);
  OptimConfig cfg;
  cfg.epochs = 3000;
  const auto joint = fit_joint(d, cfg);
  const auto single = melo::fit_gd(d, cfg);
  CHECK(joint.abilities.values == std::vector<double>{1.0});
  for (std::size_t m = 0; m < d.n_models(); ++m) {
    CHECK(std::abs(joint.ratings.values[m] - single.ratings.values[m]) <= 1e-6);
  }
}

TEST_CASE("fit_joint keeps the ability sum at one after every epoch") {
  const auto d = testing::random_dataset(8, 6, 400, 9);
  JointOptions options;
  std::size_t epochs = 0;
  double worst = 0.0;
  options.on_epoch = [&](std::size_t, std::span<const double>, std::span<const double> t) {
    ++epochs;
    worst = std::max(worst, std::abs(std::accumulate(t.begin(), t.end(), 0.0) - 1.0));
  };
  OptimConfig cfg;
  cfg.epochs = 500;
  const auto fit = fit_joint(d, cfg, options);
  CHECK(epochs == fit.epochs_run);
  CHECK(worst <= 1e-9);
  CHECK(std::abs(sum(fit.abilities.values) - 1.0) <= 1e-9);
  double mean = 0.0;
  for (double v : fit.ratings.values) mean += v / 8.0;
  CHECK(std::abs(mean) <= 1e-9);
  CHECK(fit.loss_trace.size() == fit.epochs_run);
}

TEST_CASE("fit_joint is order invariant and deterministic") {
  const auto d = testing::random_dataset(6, 5, 300, 10);
  OptimConfig cfg;
  cfg.epochs = 300;
  const auto a = fit_joint(d, cfg);
  const auto b = fit_joint(testing::shuffled(d, 3), cfg);
  CHECK(a.ratings.values == b.ratings.values);
  CHECK(a.abilities.values == b.abilities.values);
  JointOptions rnd;
  rnd.init.kind = JointInit::Kind::Random;
  rnd.init.seed = 5;
  CHECK(fit_joint(d, cfg, rnd) == fit_joint(d, cfg, rnd));
}

TEST_CASE("fit_joint flags a flipped annotator") {
  synthetic::SyntheticConfig sc;
  sc.n_models = 10;
  sc.n_annotators = 10;
  sc.records_per_annotator = 150;
  sc.seed = 3;
  const auto arena = synthetic::make_arena(sc);
  perturb::PerturbationPlan plan;
  plan.targets = {AnnotatorId("a04")};
  plan.strategy = perturb::Strategy::Flip;
  const auto bad = perturb::apply(arena.dataset, plan);
  const auto fit = fit_joint(bad.dataset, OptimConfig{});
  for (std::size_t k = 0; k < fit.abilities.size(); ++k) {
    if (fit.abilities.annotators[k] == AnnotatorId("a04")) {
      CHECK(fit.abilities.values[k] < 0.0);
    } else {
      CHECK(fit.abilities.values[k] > 0.0);
    }
  }
}

TEST_CASE("random initializations agree after convergence") {
  synthetic::SyntheticConfig sc;
  sc.n_models = 10;
  sc.n_annotators = 5;
  sc.records_per_pair = 50;
  sc.seed = 1;
  const auto d = synthetic::make_arena(sc).dataset;
  std::vector<metrics::Ranking> ranks;
  for (std::uint64_t s = 0; s < 5; ++s) {
    JointOptions o;
    o.init.kind = JointInit::Kind::Random;
    o.init.seed = s;
    ranks.push_back(metrics::rank(fit_joint(d, OptimConfig{}, o).ratings));
  }
  CHECK(metrics::multi_run_consistency(ranks) == 1.0);
}

TEST_CASE("paired annotators on a shared sample set") {
  // a sharper annotator labels the same battles with more agreement
  synthetic::SyntheticConfig sc;
  sc.n_models = 6;
  sc.n_annotators = 1;
  sc.records_per_pair = 30;
  sc.seed = 11;
  const auto base = synthetic::make_arena(sc);
  Rng rng(11);
  std::vector<ComparisonRecord> recs;
  for (const auto& r : base.dataset.records()) {
    const double diff = base.truth.at(r.first) - base.truth.at(r.second);
    const Outcome sharp = rng.uniform() < sigmoid(2.0 * diff) ? Outcome::first_wins() : Outcome::second_wins();
    const Outcome dull = rng.uniform() < sigmoid(0.3 * diff) ? Outcome::first_wins() : Outcome::second_wins();
    recs.push_back({r.first, r.second, AnnotatorId("sharp"), sharp});
    recs.push_back({r.first, r.second, AnnotatorId("dull"), dull});
  }
  const Dataset d(recs);
  const auto fit = fit_joint(d, OptimConfig{});
  CHECK(fit.abilities.at(AnnotatorId("sharp")) > fit.abilities.at(AnnotatorId("dull")));
  double agree_sharp = 0.0, agree_dull = 0.0;
  for (const auto& r : recs) {
    const double v = (fit.ratings.at(r.first) - fit.ratings.at(r.second)) * r.outcome.value();
    (r.annotator == AnnotatorId("sharp") ? agree_sharp : agree_dull) += v;
  }
  CHECK(agree_sharp > agree_dull);
}

TEST_CASE("warm start from a converged fit stays put") {
  const auto d = testing::dense_dataset(5, 3, 4, 12);
  OptimConfig cfg;
  cfg.epochs = 5000;
  cfg.grad_tol = 1e-10;
  const auto first = fit_joint(d, cfg);
  REQUIRE(first.converged);
  JointOptions warm;
  warm.init.kind = JointInit::Kind::Warm;
  warm.init.ratings = first.ratings;
  warm.init.abilities = first.abilities;
  const auto second = fit_joint(d, cfg, warm);
  CHECK(second.epochs_run <= 1);
  for (std::size_t m = 0; m < d.n_models(); ++m) {
    CHECK(second.ratings.values[m] == doctest::Approx(first.ratings.values[m]).epsilon(1e-8));
  }
}

TEST_CASE("warm start fills new models and annotators") {
  const auto d = testing::dense_dataset(4, 3, 3, 13);
  const auto first = fit_joint(d, OptimConfig{});
  auto recs = d.records();
  recs.push_back(rec("m0", "new", "fresh", 1));
  recs.push_back(rec("new", "m1", "fresh", 0));
  recs.push_back(rec("new", "m2", "fresh", 0.5));
  JointOptions warm;
  warm.init.kind = JointInit::Kind::Warm;
  warm.init.ratings = first.ratings;
  warm.init.abilities = first.abilities;
  OptimConfig cfg;
  cfg.epochs = 1;
  const auto next = fit_joint(Dataset(recs), cfg, warm);
  CHECK(std::abs(sum(next.abilities.values) - 1.0) <= 1e-9);
  CHECK(next.abilities.size() == 4);
}

TEST_CASE("fit_joint preconditions and diagnostics") {
  const Dataset idle({rec("A", "B", "k", 1), rec("A", "B", "k", 0)}, {ModelId("A"), ModelId("B")},
                     {AnnotatorId("idle"), AnnotatorId("k")});
  CHECK_THROWS_AS(fit_joint(idle, OptimConfig{}), InvalidArgument);
  const Dataset lonely({}, {ModelId("A")}, {});
  CHECK_THROWS_AS(fit_joint(lonely, OptimConfig{}), InvalidArgument);

  const Dataset split({rec("A", "B", "k", 1), rec("A", "B", "k", 0), rec("C", "D", "k", 1), rec("C", "D", "k", 0)});
  const auto fit = fit_joint(split, OptimConfig{});
  REQUIRE_FALSE(fit.warnings.empty());
  CHECK(fit.warnings[0].find("2 components") != std::string::npos);

  SUBCASE("without normalization the sum drifts") {
    const auto d = testing::random_dataset(5, 4, 200, 14);
    JointOptions o;
    o.normalize = false;
    o.init.kind = JointInit::Kind::Random;
    o.init.seed = 2;
    const auto raw = fit_joint(d, OptimConfig{}, o);
    CHECK(std::abs(sum(raw.abilities.values) - 1.0) > 1e-3);
  }
}

TEST_CASE("scaled ratings use the mean ability") {
  JointFitResult f;
  f.ratings = {{ModelId("A"), ModelId("B")}, {2.0, -2.0}};
  f.abilities = {{AnnotatorId("a"), AnnotatorId("b")}, {0.25, 0.75}};
  CHECK(f.scaled_ratings().values == std::vector<double>{1.0, -1.0});
}
