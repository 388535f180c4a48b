#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "stablearena/metrics.hpp"

using namespace stablearena;
using namespace stablearena::metrics;

namespace {

Ranking ranking_of(std::initializer_list<const char*> names) {
  Ranking r;
  for (const char* n : names) r.order.emplace_back(n);
  return r;
}

}  // namespace

TEST_CASE("mse") {
  const std::vector<double> w{1, 0, 0.5, 1};
  CHECK(mse(w, w) == 0.0);
  CHECK(mse(std::vector<double>{0.5, 0.5}, std::vector<double>{1, 0}) == 0.25);
  CHECK(mse(std::vector<double>{0.5}, std::vector<double>{0.5}) == 0.0);
  CHECK_THROWS_AS(mse(std::vector<double>{}, std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(mse(std::vector<double>{0.1}, std::vector<double>{1, 0}), InvalidArgument);
}

TEST_CASE("auc") {
  CHECK(auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<double>{1, 1, 0, 0}) == 1.0);
  CHECK(auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<double>{1, 1, 0, 0}) == 0.0);
  CHECK(auc(std::vector<double>{0.5, 0.5, 0.5}, std::vector<double>{1, 0, 1}) == 0.5);
  // ties in the outcome are dropped
  CHECK(auc(std::vector<double>{0.9, 0.0, 0.1}, std::vector<double>{1, 0.5, 0}) == 1.0);
  // one pair in four misordered
  CHECK(auc(std::vector<double>{0.9, 0.3, 0.5, 0.1}, std::vector<double>{1, 1, 0, 0}) == 0.75);
  CHECK_THROWS_AS(auc(std::vector<double>{0.3, 0.4}, std::vector<double>{1, 1}), UndefinedAuc);
  CHECK_THROWS_AS(auc(std::vector<double>{0.3, 0.4}, std::vector<double>{1, 0.5}), UndefinedAuc);
}

TEST_CASE("auc matches pair enumeration and is monotone invariant") {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> p, w;
    for (int n = 0; n < 40; ++n) {
      p.push_back(std::round(rng.uniform() * 10) / 10);  // force prediction ties
      const double u = rng.uniform();
      w.push_back(u < 0.45 ? 1.0 : (u < 0.9 ? 0.0 : 0.5));
    }
    double good = 0, pairs = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (w[i] != 1.0 || w[j] != 0.0) continue;
        pairs += 1;
        good += p[i] > p[j] ? 1.0 : (p[i] == p[j] ? 0.5 : 0.0);
      }
    }
    const double a = auc(p, w);
    CHECK(a == doctest::Approx(good / pairs).epsilon(1e-12));
    std::vector<double> q;
    for (double x : p) q.push_back(std::exp(3 * x) - 7);
    CHECK(auc(q, w) == doctest::Approx(a).epsilon(1e-12));
    std::vector<std::size_t> perm(p.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(std::span<std::size_t>(perm));
    std::vector<double> pp, ww;
    for (auto i : perm) {
      pp.push_back(p[i]);
      ww.push_back(w[i]);
    }
    CHECK(auc(pp, ww) == doctest::Approx(a).epsilon(1e-12));
    CHECK(mse(pp, ww) == doctest::Approx(mse(p, w)).epsilon(1e-12));
  }
}

TEST_CASE("rank orders by rating then id") {
  const std::vector<ModelId> models{ModelId("b"), ModelId("a"), ModelId("c")};
  CHECK(rank(models, std::vector<double>{1.0, 1.0, 2.0}) == ranking_of({"c", "a", "b"}));
  CHECK(rank(RatingVector{models, {0.0, -1.0, 3.0}}) == ranking_of({"c", "b", "a"}));
  CHECK(reversed(ranking_of({"a", "b", "c"})) == ranking_of({"c", "b", "a"}));
  CHECK_THROWS_AS(rank(models, std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("ranking_consistency examples") {
  const auto abc = ranking_of({"a", "b", "c"});
  CHECK(ranking_consistency(abc, abc) == 1.0);
  CHECK(ranking_consistency(abc, reversed(abc)) == 0.0);
  CHECK(ranking_consistency(abc, ranking_of({"b", "a", "c"})) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(ranking_consistency(abc, ranking_of({"a", "b", "d"})), InvalidArgument);
  CHECK_THROWS_AS(ranking_consistency(abc, ranking_of({"a", "b"})), InvalidArgument);
}

TEST_CASE("ranking_consistency properties") {
  Rng rng(2);
  std::vector<ModelId> models;
  for (int i = 0; i < 8; ++i) models.emplace_back("m" + std::to_string(i));
  for (int t = 0; t < 200; ++t) {
    Ranking a{models}, b{models};
    rng.shuffle(std::span<ModelId>(a.order));
    rng.shuffle(std::span<ModelId>(b.order));
    const double c = ranking_consistency(a, b);
    CHECK(c == ranking_consistency(b, a));
    CHECK(c + ranking_consistency(a, reversed(b)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK((c == 1.0) == (a == b));
    CHECK((c == 0.0) == (a == reversed(b)));
    // difference between concordant and discordant pairs over the pair count
    double concordant = 0;
    for (int i = 0; i < 8; ++i) {
      for (int j = i + 1; j < 8; ++j) {
        const auto pa_i = std::find(a.order.begin(), a.order.end(), models[i]);
        const auto pa_j = std::find(a.order.begin(), a.order.end(), models[j]);
        const auto pb_i = std::find(b.order.begin(), b.order.end(), models[i]);
        const auto pb_j = std::find(b.order.begin(), b.order.end(), models[j]);
        concordant += ((pa_i < pa_j) == (pb_i < pb_j)) ? 1 : 0;
      }
    }
    CHECK(c == doctest::Approx(concordant / 28.0).epsilon(1e-15));
  }
}

TEST_CASE("multi_run_consistency examples") {
  const auto r = ranking_of({"a", "b", "c", "d", "e"});
  const std::vector<Ranking> same(5, r);
  CHECK(multi_run_consistency(same) == 1.0);
  const std::vector<Ranking> split{r, r, reversed(r), reversed(r), reversed(r)};
  CHECK(multi_run_consistency(split) == doctest::Approx(0.4).epsilon(1e-15));
  const std::vector<Ranking> swap{ranking_of({"a", "b", "c"}), ranking_of({"b", "a", "c"})};
  CHECK(multi_run_consistency(swap) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(multi_run_consistency(std::vector<Ranking>{r}), InvalidArgument);
}

TEST_CASE("detection F1") {
  const amelo::AbilityVector ab{{AnnotatorId("a"), AnnotatorId("b"), AnnotatorId("c"), AnnotatorId("d")},
                                {0.5, -0.1, 0.003, 0.6}};
  CHECK(detection_f1(ab, {AnnotatorId("b")}, 0.0) == 1.0);
  CHECK(detection_f1(ab, {}, -1.0) == 1.0);
  CHECK(detection_f1(ab, {AnnotatorId("a")}, -1.0) == 0.0);
  // at 0.005 c is flagged too: precision 1/2, recall 1
  CHECK(detection_f1(ab, {AnnotatorId("b")}, 0.005) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  const auto out = detect(ab, {AnnotatorId("b"), AnnotatorId("d")}, 0.0);
  CHECK(out.predicted_anomalous == std::set<AnnotatorId>{AnnotatorId("b")});
  CHECK(out.precision == 1.0);
  CHECK(out.recall == 0.5);
  CHECK(detection_f1(ab, {}, 0.0) == 0.0);
  CHECK_THROWS_AS(detection_f1(ab, {AnnotatorId("z")}, 0.0), InvalidArgument);
}
