#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stablearena/amelo.hpp"
#include "stablearena/core.hpp"
#include "stablearena/report.hpp"

namespace stablearena::arena {

inline constexpr int kStateVersion = 1;

struct ArenaConfig {
  std::size_t delta = 50;  // minimum records before an annotator counts
  double epsilon = 0.0;    // annotators with theta < epsilon are banned
  OptimConfig optim;
  bool warn_only = false;  // flag low-ability annotators without banning
  bool warm_start = true;  // start each round from the previous fit
};

struct Ban {
  std::string reason;
  std::size_t round = 0;
  double theta = 0.0;

  friend bool operator==(const Ban&, const Ban&) = default;
};

struct ArenaState {
  Dataset accumulated;
  std::map<AnnotatorId, Ban> banned;
  std::optional<amelo::JointFitResult> latest;
  std::size_t round = 0;
  std::size_t dropped_total = 0;  // banned-annotator records refused so far

  friend bool operator==(const ArenaState&, const ArenaState&) = default;
};

struct RecordRejection {
  std::size_t index;  // position in the batch
  std::string reason;
};

struct IngestReport {
  std::size_t accepted = 0;
  std::size_t dropped_banned = 0;
  std::vector<RecordRejection> rejected;
};

struct IngestResult {
  ArenaState state;
  IngestReport report;
};

// Appends the batch. Self-battles are rejected per record and records from
// banned annotators are dropped; everything else is kept, duplicates
// included. Advances the round counter.
IngestResult ingest(const ArenaState& state, std::span<const ComparisonRecord> batch);

// Accumulated records of annotators with at least delta records. Recomputed
// every call, so an annotator re-enters once they reach the threshold.
Dataset eligible_subset(const ArenaState& state, std::size_t delta);

struct RoundResult {
  ArenaState state;
  std::vector<report::LeaderboardRow> leaderboard;  // mean-annotator scale
  std::vector<report::AbilityRow> abilities;
  std::vector<AnnotatorId> newly_banned;
  std::size_t eligible_records = 0;
};

// Fits am-ELO on the eligible subset, stores the fit and bans annotators
// whose ability falls below epsilon (their accumulated records are removed).
// Throws RoundSkipped when the eligible subset has fewer than 2 models.
RoundResult evaluate_round(const ArenaState& state, const ArenaConfig& cfg);

// Lifts a ban. Records removed at ban time stay removed.
ArenaState unban(const ArenaState& state, const AnnotatorId& annotator);

// Versioned JSON document.
std::string save_state(const ArenaState& state);
// Throws ParseError for malformed JSON (location = 0-based offset of the
// offending byte, the document length when it ends early), schema
// violations and unsupported versions.
ArenaState load_state(std::string_view document);

}  // namespace stablearena::arena
