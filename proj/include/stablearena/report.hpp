#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stablearena/amelo.hpp"
#include "stablearena/core.hpp"

namespace stablearena::report {

struct LeaderboardRow {
  ModelId model;
  double rating = 0.0;      // natural units
  double display = 0.0;     // 1000 + 400/ln10 * rating
  double normalized = 0.0;  // min-max over the board
  std::size_t games = 0;

  friend bool operator==(const LeaderboardRow&, const LeaderboardRow&) = default;
};

// Rows sorted best first (ties by model id). `natural` is in natural units.
std::vector<LeaderboardRow> leaderboard(const RatingVector& natural, const Dataset& dataset);

struct AbilityRow {
  AnnotatorId annotator;
  double theta = 0.0;
  std::size_t records = 0;
  bool flagged = false;  // theta < epsilon
};

std::vector<AbilityRow> ability_report(const amelo::AbilityVector& abilities,
                                       const Dataset& dataset, double epsilon);

void write_leaderboard_csv(std::span<const LeaderboardRow> rows, std::ostream& out);
nlohmann::json leaderboard_json(std::span<const LeaderboardRow> rows);
void write_ability_csv(std::span<const AbilityRow> rows, std::ostream& out);

// Quoted when the field carries a separator, quote or newline.
std::string csv_field(const std::string& s);

// Shortest round-trip representation of a double.
std::string format_number(double v);

}  // namespace stablearena::report
