#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stablearena/core.hpp"
#include "stablearena/random.hpp"

namespace testing {

using namespace stablearena;

inline ComparisonRecord rec(const char* a, const char* b, const char* k, double w) {
  return {ModelId(a), ModelId(b), AnnotatorId(k), Outcome(w)};
}

inline std::string name(char prefix, std::size_t i) { return std::string(1, prefix) + std::to_string(i); }

// Random records over n models and m annotators; outcomes drawn from a
// logistic model around random true ratings, with a share of ties.
inline Dataset random_dataset(std::size_t n, std::size_t m, std::size_t records, std::uint64_t seed,
                              double tie_rate = 0.1) {
  Rng rng(seed);
  std::vector<double> truth(n);
  for (auto& t : truth) t = rng.normal();
  std::vector<ComparisonRecord> out;
  for (std::size_t t = 0; t < records; ++t) {
    const auto i = static_cast<std::size_t>(rng.below(n));
    auto j = static_cast<std::size_t>(rng.below(n - 1));
    if (j >= i) ++j;
    const auto k = static_cast<std::size_t>(rng.below(m));
    Outcome w = Outcome::tie();
    if (rng.uniform() >= tie_rate) {
      w = rng.uniform() < sigmoid(truth[i] - truth[j]) ? Outcome::first_wins() : Outcome::second_wins();
    }
    out.push_back({ModelId(name('m', i)), ModelId(name('m', j)), AnnotatorId(name('a', k)), w});
  }
  return Dataset(std::move(out));
}

// Every ordered pair once per annotator, outcomes drawn as above: connected
// and (with overwhelming probability) with a finite MLE.
inline Dataset dense_dataset(std::size_t n, std::size_t m, std::size_t reps, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> truth(n);
  for (auto& t : truth) t = rng.normal();
  std::vector<ComparisonRecord> out;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const auto k = static_cast<std::size_t>(rng.below(m));
        const double u = rng.uniform();
        Outcome w = u < 0.1 ? Outcome::tie()
                            : (rng.uniform() < sigmoid(truth[i] - truth[j]) ? Outcome::first_wins()
                                                                           : Outcome::second_wins());
        out.push_back({ModelId(name('m', i)), ModelId(name('m', j)), AnnotatorId(name('a', k)), w});
      }
    }
  }
  return Dataset(std::move(out));
}

inline Dataset shuffled(const Dataset& d, std::uint64_t seed) {
  auto recs = d.records();
  Rng rng(seed);
  rng.shuffle(std::span<ComparisonRecord>(recs));
  return Dataset(std::move(recs), d.models(), d.annotators());
}

inline std::vector<double> random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

// Central difference of f along coordinate i.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, std::size_t i, double h = 1e-5) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace testing
