#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "stablearena/io.hpp"

using namespace stablearena;
using namespace stablearena::io;

namespace {

ParseResult parse(const std::string& text, const FieldAliases& aliases = {}) {
  std::istringstream in(text);
  return parse_records(in, aliases);
}

}  // namespace

TEST_CASE("parse examples") {
  auto r = parse(R"({"model_a":"A","model_b":"B","winner":"model_a","judge":"j1"})");
  REQUIRE(r.errors.empty());
  REQUIRE(r.dataset.size() == 1);
  CHECK(r.dataset.records()[0] == testing::rec("A", "B", "j1", 1));

  r = parse(R"({"model_a":"A","model_b":"B","winner":"tie","judge":"j1","question_id":"q9"})");
  CHECK(r.dataset.records()[0].outcome == Outcome::tie());

  r = parse(R"({"model_a":"A","model_b":"B","winner":"model_c","judge":"j1"})");
  CHECK(r.dataset.empty());
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].line == 1);
  CHECK(r.errors[0].message.find("model_c") != std::string::npos);
}

TEST_CASE("winner spellings and bad lines") {
  const std::string text =
      "{\"model_a\":\"A\",\"model_b\":\"B\",\"winner\":\"model_b\",\"judge\":\"j\"}\r\n"
      "\n"
      "{\"model_a\":\"A\",\"model_b\":\"B\",\"winner\":\"tie (bothbad)\",\"judge\":\"j\"}\n"
      "{\"model_a\":\"A\",\"model_b\":\"B\",\"winner\":\"B\",\"judge\":\"j\"}\n"
      "not json\n"
      "{\"model_a\":\"A\",\"model_b\":\"A\",\"winner\":\"tie\",\"judge\":\"j\"}\n"
      "{\"model_a\":\"A\",\"winner\":\"tie\",\"judge\":\"j\"}\n"
      "[1,2]\n"
      "{\"model_a\":\"A\",\"model_b\":\"B\",\"winner\":1,\"judge\":\"j\"}\n";
  const auto r = parse(text);
  CHECK(r.lines == 8);
  REQUIRE(r.dataset.size() == 3);
  CHECK(r.dataset.records()[0].outcome == Outcome::second_wins());
  CHECK(r.dataset.records()[1].outcome == Outcome::tie());
  CHECK(r.dataset.records()[2].outcome == Outcome::second_wins());
  REQUIRE(r.errors.size() == 5);
  CHECK(r.errors[0].line == 5);
  CHECK(r.errors[1].line == 6);
  CHECK(r.errors[1].message.find("self battle") != std::string::npos);
  CHECK(r.errors[2].line == 7);
  CHECK(r.errors[3].line == 8);
  CHECK(r.errors[4].line == 9);
}

TEST_CASE("field aliases") {
  const auto r = parse(
      R"({"model_1":"A","model_2":"B","winner":"model_a","annotator_id":"u"})"
      "\n"
      R"({"model_a":"A","model_b":"B","winner":"model_a","judge":"x","user_id":"y"})"
      "\n"
      R"({"model_a":"A","model_b":"B","winner":"model_a","judge_id":42})");
  REQUIRE(r.errors.empty());
  CHECK(r.dataset.records()[0].annotator == AnnotatorId("u"));
  CHECK(r.dataset.records()[1].annotator == AnnotatorId("x"));
  CHECK(r.dataset.records()[2].annotator == AnnotatorId("42"));

  FieldAliases custom;
  custom.annotator = {"rater"};
  const auto c = parse(R"({"model_a":"A","model_b":"B","winner":"model_a","rater":"r"})", custom);
  REQUIRE(c.errors.empty());
  CHECK(c.dataset.annotators() == std::vector<AnnotatorId>{AnnotatorId("r")});
}

TEST_CASE("parse write parse round-trip") {
  const auto d = testing::random_dataset(6, 5, 300, 1, 0.2);
  std::ostringstream out;
  write_records(d, out);
  const auto back = parse(out.str());
  CHECK(back.errors.empty());
  CHECK(back.dataset == d);
  std::ostringstream again;
  write_records(back.dataset, again);
  CHECK(again.str() == out.str());
}

TEST_CASE("files and digests") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const auto path = std::filesystem::temp_directory_path() / "stablearena_io_test.jsonl";
  {
    std::ofstream f(path, std::ios::binary);
    f << R"({"model_a":"A","model_b":"B","winner":"model_a","judge":"j1"})" << "\n";
  }
  CHECK(parse_records(path).dataset.size() == 1);
  CHECK(sha256_file(path) == sha256_hex(read_file(path)));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(parse_records(path), InvalidArgument);
  CHECK_THROWS_AS(read_file(path), InvalidArgument);
}
