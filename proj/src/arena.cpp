#include "stablearena/arena.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

namespace stablearena::arena {

using nlohmann::json;

IngestResult ingest(const ArenaState& state, std::span<const ComparisonRecord> batch) {
  IngestResult out{state, {}};
  std::vector<ComparisonRecord> records = state.accumulated.records();
  records.reserve(records.size() + batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& rec = batch[i];
    if (rec.first == rec.second) {
      out.report.rejected.push_back({i, "self battle of '" + rec.first.str() + "'"});
      continue;
    }
    if (state.banned.contains(rec.annotator)) {
      ++out.report.dropped_banned;
      continue;
    }
    records.push_back(rec);
    ++out.report.accepted;
  }
  if (out.report.accepted > 0) out.state.accumulated = Dataset(std::move(records));
  out.state.dropped_total += out.report.dropped_banned;
  ++out.state.round;
  return out;
}

Dataset eligible_subset(const ArenaState& state, std::size_t delta) {
  return filter_min_records(state.accumulated, delta);
}

RoundResult evaluate_round(const ArenaState& state, const ArenaConfig& cfg) {
  cfg.optim.validate();
  const Dataset eligible = eligible_subset(state, cfg.delta);
  if (eligible.n_models() < 2 || eligible.empty()) {
    throw RoundSkipped("round " + std::to_string(state.round) + " skipped: eligible subset has " +
                       std::to_string(eligible.n_models()) + " models and " +
                       std::to_string(eligible.size()) + " records");
  }

  amelo::JointOptions options;
  if (cfg.warm_start && state.latest) {
    options.init.kind = amelo::JointInit::Kind::Warm;
    options.init.ratings = state.latest->ratings;
    options.init.abilities = state.latest->abilities;
  }

  RoundResult out;
  out.state = state;
  out.eligible_records = eligible.size();
  out.state.latest = amelo::fit_joint(eligible, cfg.optim, options);
  const auto& fit = *out.state.latest;

  out.leaderboard = report::leaderboard(fit.scaled_ratings(), eligible);
  out.abilities = report::ability_report(fit.abilities, eligible, cfg.epsilon);

  if (!cfg.warn_only) {
    for (std::size_t k = 0; k < fit.abilities.size(); ++k) {
      const double theta = fit.abilities.values[k];
      if (!(theta < cfg.epsilon)) continue;
      const auto& id = fit.abilities.annotators[k];
      out.state.banned[id] = Ban{"ability " + report::format_number(theta) + " below epsilon " +
                                     report::format_number(cfg.epsilon),
                                 state.round, theta};
      out.newly_banned.push_back(id);
    }
  }

  if (!out.newly_banned.empty()) {
    const std::set<AnnotatorId> gone(out.newly_banned.begin(), out.newly_banned.end());
    std::vector<ComparisonRecord> kept;
    kept.reserve(state.accumulated.size());
    for (const auto& rec : state.accumulated.records()) {
      if (!gone.contains(rec.annotator)) kept.push_back(rec);
    }
    out.state.accumulated = Dataset(std::move(kept));
  }
  return out;
}

ArenaState unban(const ArenaState& state, const AnnotatorId& annotator) {
  if (!state.banned.contains(annotator)) {
    throw InvalidArgument("annotator '" + annotator.str() + "' is not banned");
  }
  ArenaState out = state;
  out.banned.erase(annotator);
  return out;
}

namespace {

json ids_json(const auto& ids) {
  json arr = json::array();
  for (const auto& id : ids) arr.push_back(id.str());
  return arr;
}

json fit_json(const amelo::JointFitResult& fit) {
  return json{
      {"models", ids_json(fit.ratings.models)},
      {"ratings", fit.ratings.values},
      {"annotators", ids_json(fit.abilities.annotators)},
      {"abilities", fit.abilities.values},
      {"loss_trace", fit.loss_trace},
      {"converged", fit.converged},
      {"grad_norm", fit.grad_norm},
      {"epochs_run", fit.epochs_run},
      {"warnings", fit.warnings},
  };
}

template <typename Id>
std::vector<Id> ids_from(const json& arr) {
  std::vector<Id> out;
  for (const auto& v : arr) out.emplace_back(v.get<std::string>());
  return out;
}

amelo::JointFitResult fit_from(const json& j) {
  amelo::JointFitResult fit;
  fit.ratings = {ids_from<ModelId>(j.at("models")), j.at("ratings").get<std::vector<double>>(),
                 Anchor::MeanZero};
  fit.abilities = {ids_from<AnnotatorId>(j.at("annotators")),
                   j.at("abilities").get<std::vector<double>>()};
  fit.loss_trace = j.at("loss_trace").get<std::vector<double>>();
  fit.converged = j.at("converged").get<bool>();
  fit.grad_norm = j.at("grad_norm").get<double>();
  fit.epochs_run = j.at("epochs_run").get<std::size_t>();
  fit.warnings = j.at("warnings").get<std::vector<std::string>>();
  if (fit.ratings.models.size() != fit.ratings.values.size() ||
      fit.abilities.annotators.size() != fit.abilities.values.size()) {
    throw InvalidArgument("fit arrays differ in length");
  }
  return fit;
}

}  // namespace

std::string save_state(const ArenaState& state) {
  json records = json::array();
  for (const auto& r : state.accumulated.records()) {
    records.push_back({r.first.str(), r.second.str(), r.annotator.str(), r.outcome.value()});
  }
  json banned = json::array();
  for (const auto& [id, ban] : state.banned) {
    banned.push_back({{"annotator", id.str()},
                      {"reason", ban.reason},
                      {"round", ban.round},
                      {"theta", ban.theta}});
  }
  json doc{
      {"version", kStateVersion},
      {"round", state.round},
      {"dropped_total", state.dropped_total},
      {"records", std::move(records)},
      {"banned", std::move(banned)},
      {"latest", state.latest ? fit_json(*state.latest) : json(nullptr)},
  };
  return doc.dump(1) + "\n";
}

ArenaState load_state(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    // nlohmann counts bytes read, so the failing byte sits one before
    throw ParseError(std::string("arena state: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!doc.is_object() || !doc.contains("version")) {
    throw ParseError("arena state: missing top-level \"version\"", 0);
  }
  if (doc["version"] != kStateVersion) {
    throw ParseError("arena state: unsupported version " + doc["version"].dump() + " (expected " +
                         std::to_string(kStateVersion) + ")",
                     0);
  }
  try {
    ArenaState state;
    state.round = doc.at("round").get<std::size_t>();
    state.dropped_total = doc.at("dropped_total").get<std::size_t>();
    std::vector<ComparisonRecord> records;
    for (const auto& r : doc.at("records")) {
      if (!r.is_array() || r.size() != 4) throw InvalidArgument("record must be a 4-element array");
      records.push_back({ModelId(r[0].get<std::string>()), ModelId(r[1].get<std::string>()),
                         AnnotatorId(r[2].get<std::string>()), Outcome(r[3].get<double>())});
    }
    state.accumulated = Dataset(std::move(records));
    for (const auto& b : doc.at("banned")) {
      state.banned[AnnotatorId(b.at("annotator").get<std::string>())] =
          Ban{b.at("reason").get<std::string>(), b.at("round").get<std::size_t>(),
              b.at("theta").get<double>()};
    }
    const auto& latest = doc.at("latest");
    if (!latest.is_null()) state.latest = fit_from(latest);
    return state;
  } catch (const json::exception& e) {
    throw ParseError(std::string("arena state: ") + e.what(), 0);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("arena state: ") + e.what(), 0);
  }
}

}  // namespace stablearena::arena
