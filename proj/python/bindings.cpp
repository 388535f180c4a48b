#include <tuple>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stablearena/amelo.hpp"
#include "stablearena/arena.hpp"
#include "stablearena/classic.hpp"
#include "stablearena/core.hpp"
#include "stablearena/experiment.hpp"
#include "stablearena/io.hpp"
#include "stablearena/melo.hpp"
#include "stablearena/metrics.hpp"
#include "stablearena/perturb.hpp"
#include "stablearena/synthetic.hpp"

namespace py = pybind11;
using namespace stablearena;

namespace {

using RecordTuple = std::tuple<std::string, std::string, std::string, double>;

std::vector<ComparisonRecord> to_records(const std::vector<RecordTuple>& rows) {
  std::vector<ComparisonRecord> out;
  out.reserve(rows.size());
  for (const auto& [a, b, k, w] : rows) out.push_back({ModelId(a), ModelId(b), AnnotatorId(k), Outcome(w)});
  return out;
}

std::vector<RecordTuple> from_records(const std::vector<ComparisonRecord>& recs) {
  std::vector<RecordTuple> out;
  out.reserve(recs.size());
  for (const auto& r : recs) out.emplace_back(r.first.str(), r.second.str(), r.annotator.str(), r.outcome.value());
  return out;
}

template <typename Id>
std::vector<std::string> names(const std::vector<Id>& ids) {
  std::vector<std::string> out;
  for (const auto& id : ids) out.push_back(id.str());
  return out;
}

// Ratings and abilities cross the boundary as insertion-ordered dicts.
py::dict rating_dict(const RatingVector& r) {
  py::dict d;
  for (std::size_t i = 0; i < r.size(); ++i) d[py::str(r.models[i].str())] = r.values[i];
  return d;
}

py::dict ability_dict(const amelo::AbilityVector& a) {
  py::dict d;
  for (std::size_t i = 0; i < a.size(); ++i) d[py::str(a.annotators[i].str())] = a.values[i];
  return d;
}

RatingVector rating_vector(const py::dict& d) {
  RatingVector r;
  for (auto [k, v] : d) {
    r.models.emplace_back(k.cast<std::string>());
    r.values.push_back(v.cast<double>());
  }
  return r;
}

amelo::AbilityVector ability_vector(const py::dict& d) {
  amelo::AbilityVector a;
  for (auto [k, v] : d) {
    a.annotators.emplace_back(k.cast<std::string>());
    a.values.push_back(v.cast<double>());
  }
  return a;
}

OptimConfig optim(double lr, std::size_t epochs, double grad_tol, double ridge) {
  return {lr, epochs, grad_tol, ridge};
}

std::vector<metrics::Ranking> rankings(const std::vector<std::vector<std::string>>& orders) {
  std::vector<metrics::Ranking> out;
  for (const auto& o : orders) {
    metrics::Ranking r;
    for (const auto& s : o) r.order.emplace_back(s);
    out.push_back(std::move(r));
  }
  return out;
}

std::set<AnnotatorId> id_set(const std::vector<std::string>& ids) {
  std::set<AnnotatorId> out;
  for (const auto& s : ids) out.emplace(s);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Elo, m-ELO and am-ELO rating estimators";

  auto base = py::register_exception<Error>(m, "StableArenaError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
  py::register_exception<DegenerateNormalization>(m, "DegenerateNormalization", base.ptr());
  py::register_exception<SingularHessian>(m, "SingularHessian", base.ptr());
  py::register_exception<UndefinedAuc>(m, "UndefinedAuc", base.ptr());
  py::register_exception<RoundSkipped>(m, "RoundSkipped", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](const std::vector<RecordTuple>& rows) { return Dataset(to_records(rows)); }),
           py::arg("records"), "Records are (first, second, annotator, outcome) with outcome in {0, 0.5, 1}.")
      .def_property_readonly("records", [](const Dataset& d) { return from_records(d.records()); })
      .def_property_readonly("models", [](const Dataset& d) { return names(d.models()); })
      .def_property_readonly("annotators", [](const Dataset& d) { return names(d.annotators()); })
      .def("__len__", &Dataset::size)
      .def("__eq__", [](const Dataset& a, const Dataset& b) { return a == b; });

  m.def("win_prob", [](double ri, double rj, double c) { return win_prob(ri, rj, ScaleConstant(c)); },
        py::arg("r_i"), py::arg("r_j"), py::arg("c") = 1.0);
  m.def("validate", [](const Dataset& d) {
    const auto rep = validate(d);
    py::dict out;
    std::vector<std::string> errors, warnings;
    for (const auto& e : rep.errors) errors.push_back(e.message);
    for (const auto& w : rep.warnings) warnings.push_back(w.message);
    out["errors"] = errors;
    out["warnings"] = warnings;
    out["components"] = rep.components;
    return out;
  });
  m.def("filter_min_records", &filter_min_records, py::arg("dataset"), py::arg("delta"));
  m.def("win_matrix", [](const Dataset& d) {
    const auto wm = win_matrix(d);
    return py::make_tuple(names(wm.models), wm.wins, wm.ties);
  });

  m.def("elo_run_pass",
        [](const Dataset& d, double k, double r_init) {
          classic::ClassicConfig cfg;
          cfg.k_factor = k;
          cfg.r_init = r_init;
          return rating_dict(classic::run_pass(d, cfg));
        },
        py::arg("dataset"), py::arg("k") = 4.0, py::arg("r_init") = 1000.0);
  m.def("elo_shuffled_mean",
        [](const Dataset& d, std::size_t n_shuffles, std::uint64_t seed, double k) {
          classic::ClassicConfig cfg;
          cfg.k_factor = k;
          const auto s = classic::shuffled_mean(d, cfg, n_shuffles, seed);
          return py::make_tuple(rating_dict(s.mean), s.std);
        },
        py::arg("dataset"), py::arg("n_shuffles") = 1000, py::arg("seed") = 0, py::arg("k") = 4.0);

  m.def("log_likelihood",
        [](const py::dict& r, const Dataset& d, double c) {
          return melo::log_likelihood(rating_vector(r), d, ScaleConstant(c));
        },
        py::arg("ratings"), py::arg("dataset"), py::arg("c") = 1.0);
  m.def("gradient",
        [](const py::dict& r, const Dataset& d, double c) {
          return melo::gradient(rating_vector(r), d, ScaleConstant(c));
        },
        py::arg("ratings"), py::arg("dataset"), py::arg("c") = 1.0);
  m.def("hessian",
        [](const py::dict& r, const Dataset& d, double c) {
          return melo::hessian(rating_vector(r), d, ScaleConstant(c));
        },
        py::arg("ratings"), py::arg("dataset"), py::arg("c") = 1.0);

  py::class_<melo::FitResult>(m, "FitResult")
      .def_property_readonly("ratings", [](const melo::FitResult& f) { return rating_dict(f.ratings); })
      .def_readonly("loss_trace", &melo::FitResult::loss_trace)
      .def_readonly("converged", &melo::FitResult::converged)
      .def_readonly("grad_norm", &melo::FitResult::grad_norm)
      .def_readonly("epochs_run", &melo::FitResult::epochs_run)
      .def_readonly("warnings", &melo::FitResult::warnings);

  m.def("fit_gd",
        [](const Dataset& d, double lr, std::size_t epochs, double grad_tol, double ridge, double c) {
          return melo::fit_gd(d, optim(lr, epochs, grad_tol, ridge), ScaleConstant(c));
        },
        py::arg("dataset"), py::arg("lr") = 0.1, py::arg("epochs") = 2000, py::arg("grad_tol") = 1e-8,
        py::arg("ridge") = 0.0, py::arg("c") = 1.0);
  m.def("fit_newton",
        [](const Dataset& d, std::size_t epochs, double grad_tol, double ridge, double c) {
          return melo::fit_newton(d, optim(0.1, epochs, grad_tol, ridge), ScaleConstant(c));
        },
        py::arg("dataset"), py::arg("epochs") = 100, py::arg("grad_tol") = 1e-10, py::arg("ridge") = 0.0,
        py::arg("c") = 1.0);

  py::class_<amelo::JointFitResult>(m, "JointFitResult")
      .def_property_readonly("ratings", [](const amelo::JointFitResult& f) { return rating_dict(f.ratings); })
      .def_property_readonly("scaled_ratings",
                             [](const amelo::JointFitResult& f) { return rating_dict(f.scaled_ratings()); })
      .def_property_readonly("abilities", [](const amelo::JointFitResult& f) { return ability_dict(f.abilities); })
      .def_readonly("loss_trace", &amelo::JointFitResult::loss_trace)
      .def_readonly("converged", &amelo::JointFitResult::converged)
      .def_readonly("grad_norm", &amelo::JointFitResult::grad_norm)
      .def_readonly("epochs_run", &amelo::JointFitResult::epochs_run)
      .def_readonly("warnings", &amelo::JointFitResult::warnings);

  m.def("fit_joint",
        [](const Dataset& d, double lr, std::size_t epochs, double grad_tol, bool normalize,
           std::optional<std::uint64_t> init_seed) {
          amelo::JointOptions options;
          options.normalize = normalize;
          if (init_seed) {
            options.init.kind = amelo::JointInit::Kind::Random;
            options.init.seed = *init_seed;
          }
          return amelo::fit_joint(d, optim(lr, epochs, grad_tol, 0.0), options);
        },
        py::arg("dataset"), py::arg("lr") = 0.1, py::arg("epochs") = 2000, py::arg("grad_tol") = 1e-8,
        py::arg("normalize") = true, py::arg("init_seed") = py::none());
  m.def("log_likelihood_joint",
        [](const py::dict& r, const py::dict& t, const Dataset& d) {
          return amelo::log_likelihood_joint(rating_vector(r), ability_vector(t), d);
        },
        py::arg("ratings"), py::arg("abilities"), py::arg("dataset"));
  m.def("gradients_joint",
        [](const py::dict& r, const py::dict& t, const Dataset& d) {
          auto g = amelo::gradients_joint(rating_vector(r), ability_vector(t), d);
          return py::make_tuple(g.ratings, g.abilities);
        },
        py::arg("ratings"), py::arg("abilities"), py::arg("dataset"));

  m.def("perturb",
        [](const Dataset& d, const std::vector<std::string>& targets, const std::string& strategy,
           std::uint64_t seed) {
          perturb::PerturbationPlan plan;
          plan.targets = id_set(targets);
          plan.strategy = perturb::parse_strategy(strategy);
          plan.seed = seed;
          auto res = perturb::apply(d, plan);
          py::dict truth;
          for (const auto& [id, bad] : res.anomalous) truth[py::str(id.str())] = bad;
          return py::make_tuple(std::move(res.dataset), truth);
        },
        py::arg("dataset"), py::arg("targets"), py::arg("strategy"), py::arg("seed") = 0);
  m.def("sample_targets",
        [](const Dataset& d, double ratio, std::uint64_t seed) {
          std::vector<std::string> out;
          for (const auto& id : perturb::sample_targets(d, ratio, seed)) out.push_back(id.str());
          return out;
        },
        py::arg("dataset"), py::arg("ratio"), py::arg("seed") = 0);

  m.def("mse", [](const std::vector<double>& p, const std::vector<double>& w) { return metrics::mse(p, w); });
  m.def("auc", [](const std::vector<double>& p, const std::vector<double>& w) { return metrics::auc(p, w); });
  m.def("rank", [](const py::dict& r) { return names(metrics::rank(rating_vector(r)).order); });
  m.def("ranking_consistency", [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
    auto rs = rankings({a, b});
    return metrics::ranking_consistency(rs[0], rs[1]);
  });
  m.def("multi_run_consistency", [](const std::vector<std::vector<std::string>>& orders) {
    return metrics::multi_run_consistency(rankings(orders));
  });
  m.def("detection_f1",
        [](const py::dict& abilities, const std::vector<std::string>& truth, double epsilon) {
          return metrics::detection_f1(ability_vector(abilities), id_set(truth), epsilon);
        },
        py::arg("abilities"), py::arg("truth"), py::arg("epsilon") = 0.0);

  m.def("synthetic_arena",
        [](std::size_t n_models, std::size_t n_annotators, std::size_t records_per_annotator,
           std::size_t records_per_pair, double rating_gap, std::uint64_t seed) {
          synthetic::SyntheticConfig cfg;
          cfg.n_models = n_models;
          cfg.n_annotators = n_annotators;
          cfg.records_per_annotator = records_per_annotator;
          cfg.records_per_pair = records_per_pair;
          cfg.rating_gap = rating_gap;
          cfg.seed = seed;
          auto a = synthetic::make_arena(cfg);
          return py::make_tuple(std::move(a.dataset), rating_dict(a.truth));
        },
        py::arg("n_models") = 20, py::arg("n_annotators") = 40, py::arg("records_per_annotator") = 100,
        py::arg("records_per_pair") = 0, py::arg("rating_gap") = 0.5, py::arg("seed") = 0);

  m.def("parse_records", [](const std::filesystem::path& p) {
    auto res = io::parse_records(p);
    std::vector<std::pair<std::size_t, std::string>> errors;
    for (const auto& e : res.errors) errors.emplace_back(e.line, e.message);
    return py::make_tuple(std::move(res.dataset), errors);
  });
  m.def("sha256_hex", [](const py::bytes& b) { return io::sha256_hex(std::string(b)); });

  py::class_<arena::ArenaState>(m, "ArenaState")
      .def(py::init<>())
      .def_readonly("round", &arena::ArenaState::round)
      .def_readonly("dropped_total", &arena::ArenaState::dropped_total)
      .def_readonly("accumulated", &arena::ArenaState::accumulated)
      .def_property_readonly("banned",
                             [](const arena::ArenaState& s) {
                               py::dict d;
                               for (const auto& [id, ban] : s.banned) d[py::str(id.str())] = ban.reason;
                               return d;
                             })
      .def_readonly("latest", &arena::ArenaState::latest)
      .def("__eq__", [](const arena::ArenaState& a, const arena::ArenaState& b) { return a == b; });

  m.def("arena_ingest", [](const arena::ArenaState& s, const std::vector<RecordTuple>& batch) {
    const auto recs = to_records(batch);
    auto res = arena::ingest(s, recs);
    return py::make_tuple(std::move(res.state), res.report.accepted, res.report.dropped_banned,
                          res.report.rejected.size());
  });
  m.def("arena_evaluate",
        [](const arena::ArenaState& s, std::size_t delta, double epsilon, double lr, std::size_t epochs,
           bool warn_only) {
          arena::ArenaConfig cfg;
          cfg.delta = delta;
          cfg.epsilon = epsilon;
          cfg.optim = optim(lr, epochs, 1e-8, 0.0);
          cfg.warn_only = warn_only;
          auto res = arena::evaluate_round(s, cfg);
          std::vector<std::pair<std::string, double>> board;
          for (const auto& row : res.leaderboard) board.emplace_back(row.model.str(), row.rating);
          return py::make_tuple(std::move(res.state), board, names(res.newly_banned));
        },
        py::arg("state"), py::arg("delta") = 50, py::arg("epsilon") = 0.0, py::arg("lr") = 0.1,
        py::arg("epochs") = 2000, py::arg("warn_only") = false);
  m.def("arena_unban",
        [](const arena::ArenaState& s, const std::string& id) { return arena::unban(s, AnnotatorId(id)); });
  m.def("save_state", &arena::save_state);
  m.def("load_state", [](const std::string& doc) { return arena::load_state(doc); });
}
