#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "stablearena/core.hpp"

namespace stablearena::io {

// JSON Lines vote log. Field names accepted per role (first match wins):
//
//   first model   model_a, model_1, first
//   second model  model_b, model_2, second
//   annotator     judge, annotator, judge_id, annotator_id, user_id
//   outcome       winner
//
// winner is "model_a", "model_b", "tie" or "tie (bothbad)", or one of the
// model names themselves. question_id and any other fields are ignored.
struct FieldAliases {
  std::vector<std::string> first{"model_a", "model_1", "first"};
  std::vector<std::string> second{"model_b", "model_2", "second"};
  std::vector<std::string> annotator{"judge", "annotator", "judge_id", "annotator_id", "user_id"};
  std::vector<std::string> winner{"winner"};
};

struct LineError {
  std::size_t line;  // 1-based
  std::string message;
};

struct ParseResult {
  Dataset dataset;
  std::vector<LineError> errors;  // rejected lines; the rest are kept
  std::size_t lines = 0;          // non-blank lines seen
};

ParseResult parse_records(std::istream& in, const FieldAliases& aliases = {});
// Throws InvalidArgument if the file cannot be opened.
ParseResult parse_records(const std::filesystem::path& path, const FieldAliases& aliases = {});

// One JSON object per record in ingestion order, using the primary field names.
void write_records(const Dataset& dataset, std::ostream& out);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

}  // namespace stablearena::io
