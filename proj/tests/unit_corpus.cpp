#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "idiolect/corpus.hpp"
#include "idiolect/errors.hpp"
#include "support/synthetic.hpp"

using namespace idiolect;

namespace {

std::filesystem::path write_lines(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  return path;
}

Document doc(std::string id, std::string prompt, std::string response, std::string label) {
  Document d;
  d.id = std::move(id);
  d.prompt = std::move(prompt);
  d.response = std::move(response);
  d.label = std::move(label);
  return d;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("load_jsonl reads a two-line file with labels") {
  auto path = write_lines(
      "corpus_two.jsonl",
      R"({"id":"x1","prompt":"p1","response":"r1","model":"m-one"})"
      "\n"
      R"({"id":"x2","prompt":"p2","response":"r2","model":"m-two"})"
      "\n");
  auto corpus = load_jsonl(path.string());
  REQUIRE(corpus.size() == 2);
  CHECK(corpus.documents()[0].id == "x1");
  CHECK(corpus.documents()[1].response == "r2");
  CHECK(corpus.labels() == std::vector<std::string>{"m-one", "m-two"});
}

TEST_CASE("load_jsonl of an empty file gives an empty corpus") {
  auto path = write_lines("corpus_empty.jsonl", "");
  auto corpus = load_jsonl(path.string());
  CHECK(corpus.size() == 0);
  CHECK(corpus.labels().empty());
}

TEST_CASE("missing field error names the line and the field") {
  auto path = write_lines(
      "corpus_missing.jsonl",
      R"({"id":"a","prompt":"p","response":"r","model":"m"})"
      "\n"
      R"({"id":"b","prompt":"p","response":"r","model":"m"})"
      "\n"
      R"({"id":"c","prompt":"p","response":"r"})"
      "\n");
  try {
    load_jsonl(path.string());
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string message = e.what();
    CHECK(message.find(":3") != std::string::npos);
    CHECK(message.find("model") != std::string::npos);
  }
}

TEST_CASE("malformed JSON carries the line number") {
  auto path = write_lines("corpus_bad.jsonl",
                          R"({"id":"a","prompt":"p","response":"r","model":"m"})"
                          "\nnot json\n");
  try {
    load_jsonl(path.string());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("duplicate ids are rejected") {
  auto path = write_lines("corpus_dup.jsonl",
                          R"({"id":"a","prompt":"p","response":"r","model":"m"})"
                          "\n"
                          R"({"id":"a","prompt":"q","response":"s","model":"m"})"
                          "\n");
  CHECK_THROWS_AS(load_jsonl(path.string()), ValidationError);
}

TEST_CASE("save then load round-trips documents exactly") {
  std::vector<Document> docs;
  auto d1 = doc("r1", "what?", "resp with \"quotes\" and\nnewline", "model-a");
  d1.meta["dataset"] = "unit";
  d1.split = Split::train;
  auto d2 = doc("r2", "why?", "unicode \xc3\xa9 ok", "model-b");
  d2.split = Split::val;
  docs.push_back(d1);
  docs.push_back(d2);
  Corpus corpus(docs);

  auto path = std::filesystem::temp_directory_path() / "corpus_roundtrip.jsonl";
  save_jsonl(corpus, path.string());
  auto loaded = load_jsonl(path.string());
  REQUIRE(loaded.size() == 2);
  CHECK(loaded.documents()[0] == d1);
  CHECK(loaded.documents()[1] == d2);
}

TEST_CASE("empty response needs a failure or transform marker") {
  auto bare = doc("a", "p", "", "m");
  CHECK_THROWS_AS(Corpus({bare}), ValidationError);
  bare.meta["generation_error"] = "timeout";
  CHECK_NOTHROW(Corpus({bare}));
  bare.meta.clear();
  bare.meta["transform"] = "truncate-tokens";
  CHECK_NOTHROW(Corpus({bare}));
}

TEST_CASE("split tags are all-or-none") {
  auto tagged = doc("a", "p", "r", "m");
  tagged.split = Split::train;
  auto untagged = doc("b", "p", "r", "m");
  CHECK_THROWS_AS(Corpus({tagged, untagged}), ValidationError);
}

TEST_CASE("split_corpus selects exact per-label counts deterministically") {
  auto corpus = testsupport::make_labeled_corpus(
      {testsupport::style_a(), testsupport::style_b()}, 20, 12, 99);
  auto once = split_corpus(corpus, 12, 5, 41);
  auto twice = split_corpus(corpus, 12, 5, 41);
  REQUIRE(once.size() == 2 * (12 + 5));
  CHECK(once.documents() == twice.documents());

  for (const auto& label : once.labels()) {
    size_t train_count = 0, val_count = 0;
    std::set<std::string> train_ids, val_ids;
    for (const auto& d : once.documents()) {
      if (d.label != label) continue;
      if (d.split == Split::train) {
        ++train_count;
        train_ids.insert(d.id);
      } else if (d.split == Split::val) {
        ++val_count;
        val_ids.insert(d.id);
      }
    }
    CHECK(train_count == 12);
    CHECK(val_count == 5);
    for (const auto& id : val_ids) CHECK(train_ids.count(id) == 0);
  }
}

TEST_CASE("split_corpus applies the same index permutation to equal-size labels") {
  // Prompt-aligned corpora must split identically so cross-model comparisons
  // stay honest.
  auto corpus = testsupport::make_labeled_corpus(
      {testsupport::style_a(), testsupport::style_b()}, 10, 8, 7);
  auto tagged = split_corpus(corpus, 6, 2, 13);
  std::map<std::string, Split> by_prompt_a, by_prompt_b;
  for (const auto& d : tagged.documents()) {
    if (d.label == "alpine") by_prompt_a[d.prompt] = *d.split;
    if (d.label == "breeze") by_prompt_b[d.prompt] = *d.split;
  }
  CHECK(by_prompt_a == by_prompt_b);
}

TEST_CASE("split_corpus names a label with too few documents") {
  auto corpus = testsupport::make_labeled_corpus({testsupport::style_a()}, 5, 8, 7);
  try {
    split_corpus(corpus, 10, 1, 0);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("alpine") != std::string::npos);
  }
}

TEST_CASE("align_by_prompt pairs two corpora over shared prompts") {
  Corpus left({doc("l1", "p1", "a", "m1"), doc("l2", "p2", "b", "m1")});
  Corpus right({doc("r2", "p2", "d", "m2"), doc("r1", "p1", "c", "m2")});
  auto tuples = align_by_prompt({left, right});
  REQUIRE(tuples.size() == 2);
  REQUIRE(tuples[0].size() == 2);
  CHECK(tuples[0][0].id == "l1");
  CHECK(tuples[0][1].id == "r1");
  CHECK(tuples[1][0].id == "l2");
  CHECK(tuples[1][1].id == "r2");
}

TEST_CASE("align_by_prompt with three corpora and three prompts") {
  auto corpus = testsupport::make_labeled_corpus(
      {testsupport::style_a(), testsupport::style_b(), testsupport::style_c()}, 3, 6, 1);
  std::vector<Corpus> per_label;
  for (const auto& label : corpus.labels()) {
    std::vector<Document> docs;
    for (const auto& d : corpus.documents())
      if (d.label == label) docs.push_back(d);
    per_label.emplace_back(std::move(docs));
  }
  auto tuples = align_by_prompt(per_label);
  REQUIRE(tuples.size() == 3);
  for (const auto& tuple : tuples) {
    REQUIRE(tuple.size() == 3);
    CHECK(tuple[0].prompt == tuple[1].prompt);
    CHECK(tuple[1].prompt == tuple[2].prompt);
  }
}

TEST_CASE("align_by_prompt rejects disjoint prompts") {
  Corpus left({doc("l1", "p1", "a", "m1")});
  Corpus right({doc("r1", "qz", "b", "m2")});
  CHECK_THROWS_AS(align_by_prompt({left, right}), ValidationError);
}

TEST_CASE("duplicate prompts pair by occurrence order") {
  Corpus left({doc("l1", "p", "a", "m1"), doc("l2", "p", "b", "m1")});
  Corpus right({doc("r1", "p", "c", "m2"), doc("r2", "p", "d", "m2")});
  auto tuples = align_by_prompt({left, right});
  REQUIRE(tuples.size() == 2);
  CHECK(tuples[0][0].id == "l1");
  CHECK(tuples[0][1].id == "r1");
  CHECK(tuples[1][0].id == "l2");
  CHECK(tuples[1][1].id == "r2");
}

TEST_CASE("training and validation views honor split tags") {
  auto corpus = testsupport::make_labeled_corpus({testsupport::style_a()}, 10, 8, 3);
  CHECK(training_documents(corpus).size() == 10);    // untagged: everything
  CHECK(validation_documents(corpus).size() == 10);
  auto tagged = split_corpus(corpus, 7, 3, 5);
  CHECK(training_documents(tagged).size() == 7);
  CHECK(validation_documents(tagged).size() == 3);
}

}  // TEST_SUITE
