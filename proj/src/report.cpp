#include "stablearena/report.hpp"

#include <algorithm>
#include <charconv>

#include "stablearena/melo.hpp"
#include "stablearena/metrics.hpp"

namespace stablearena::report {

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<LeaderboardRow> leaderboard(const RatingVector& natural, const Dataset& dataset) {
  const auto values = stablearena::detail::aligned_ratings(natural, dataset);
  const auto normalized = melo::min_max_normalize(values);
  const auto games = dataset.model_counts();
  const auto order = metrics::rank(dataset.models(), values);

  std::vector<LeaderboardRow> rows;
  rows.reserve(values.size());
  for (const auto& id : order.order) {
    const auto m = *dataset.model_index(id);
    rows.push_back({id, values[m], melo::to_display(values[m]), normalized[m], games[m]});
  }
  return rows;
}

std::vector<AbilityRow> ability_report(const amelo::AbilityVector& abilities,
                                       const Dataset& dataset, double epsilon) {
  const auto counts = dataset.annotator_counts();
  std::vector<AbilityRow> rows;
  rows.reserve(abilities.size());
  for (std::size_t k = 0; k < abilities.size(); ++k) {
    const auto idx = dataset.annotator_index(abilities.annotators[k]);
    rows.push_back({abilities.annotators[k], abilities.values[k], idx ? counts[*idx] : 0,
                    abilities.values[k] < epsilon});
  }
  return rows;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

void write_leaderboard_csv(std::span<const LeaderboardRow> rows, std::ostream& out) {
  out << "rank,model,rating,display,normalized,games\n";
  std::size_t rank = 1;
  for (const auto& r : rows) {
    out << rank++ << ',' << csv_field(r.model.str()) << ',' << format_number(r.rating) << ','
        << format_number(r.display) << ',' << format_number(r.normalized) << ',' << r.games << '\n';
  }
}

nlohmann::json leaderboard_json(std::span<const LeaderboardRow> rows) {
  auto arr = nlohmann::json::array();
  std::size_t rank = 1;
  for (const auto& r : rows) {
    arr.push_back({{"rank", rank++},
                   {"model", r.model.str()},
                   {"rating", r.rating},
                   {"display", r.display},
                   {"normalized", r.normalized},
                   {"games", r.games}});
  }
  return arr;
}

void write_ability_csv(std::span<const AbilityRow> rows, std::ostream& out) {
  out << "annotator,theta,records,flagged\n";
  for (const auto& r : rows) {
    out << csv_field(r.annotator.str()) << ',' << format_number(r.theta) << ',' << r.records << ','
        << (r.flagged ? 1 : 0) << '\n';
  }
}

}  // namespace stablearena::report
