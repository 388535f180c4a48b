#include "stablearena/io.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

namespace stablearena::io {

using nlohmann::json;

namespace {

const json* lookup(const json& obj, const std::vector<std::string>& names) {
  for (const auto& n : names) {
    auto it = obj.find(n);
    if (it != obj.end()) return &*it;
  }
  return nullptr;
}

std::string field(const json& obj, const std::vector<std::string>& names, const char* role) {
  const json* v = lookup(obj, names);
  if (v == nullptr) throw InvalidArgument(std::string("missing ") + role + " field (" + names.front() + ")");
  if (v->is_string()) {
    auto s = v->get<std::string>();
    if (s.empty()) throw InvalidArgument(std::string("empty ") + role);
    return s;
  }
  if (v->is_number_integer() || v->is_number_unsigned()) return v->dump();
  throw InvalidArgument(std::string(role) + " must be a string");
}

Outcome parse_winner(const std::string& w, const std::string& a, const std::string& b) {
  if (w == "model_a" || w == a) return Outcome::first_wins();
  if (w == "model_b" || w == b) return Outcome::second_wins();
  if (w == "tie" || w == "tie (bothbad)") return Outcome::tie();
  throw InvalidArgument("unknown winner value \"" + w + "\"");
}

}  // namespace

ParseResult parse_records(std::istream& in, const FieldAliases& aliases) {
  ParseResult out;
  std::vector<ComparisonRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++out.lines;
    try {
      const json obj = json::parse(line);
      if (!obj.is_object()) throw InvalidArgument("line is not a JSON object");
      auto a = field(obj, aliases.first, "first model");
      auto b = field(obj, aliases.second, "second model");
      auto judge = field(obj, aliases.annotator, "annotator");
      const json* w = lookup(obj, aliases.winner);
      if (w == nullptr || !w->is_string()) throw InvalidArgument("missing or non-string winner");
      if (a == b) throw InvalidArgument("self battle of '" + a + "'");
      const Outcome outcome = parse_winner(w->get<std::string>(), a, b);
      records.push_back({ModelId(std::move(a)), ModelId(std::move(b)), AnnotatorId(std::move(judge)), outcome});
    } catch (const json::exception& e) {
      out.errors.push_back({lineno, e.what()});
    } catch (const InvalidArgument& e) {
      out.errors.push_back({lineno, e.what()});
    }
  }
  out.dataset = Dataset(std::move(records));
  return out;
}

ParseResult parse_records(const std::filesystem::path& path, const FieldAliases& aliases) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  return parse_records(in, aliases);
}

void write_records(const Dataset& dataset, std::ostream& out) {
  for (const auto& r : dataset.records()) {
    const char* winner = r.outcome.is_tie() ? "tie" : (r.outcome.value() == 1.0 ? "model_a" : "model_b");
    json obj{{"model_a", r.first.str()}, {"model_b", r.second.str()}, {"winner", winner},
             {"judge", r.annotator.str()}};
    out << obj.dump() << '\n';
  }
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  s.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    s.push_back(hex[md[i] >> 4]);
    s.push_back(hex[md[i] & 0xf]);
  }
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

}  // namespace stablearena::io
