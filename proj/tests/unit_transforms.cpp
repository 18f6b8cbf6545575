#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "idiolect/errors.hpp"
#include "idiolect/markdown.hpp"
#include "idiolect/rng.hpp"
#include "idiolect/transforms.hpp"
#include "support/synthetic.hpp"

using namespace idiolect;

namespace {

std::vector<std::string> words_of(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  std::string word;
  while (in >> word) words.push_back(word);
  return words;
}

std::multiset<char> letters_of(const std::string& text) {
  std::multiset<char> letters;
  for (char c : text)
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) letters.insert(c);
  return letters;
}

std::vector<size_t> word_lengths(const std::string& text) {
  std::vector<size_t> lengths;
  for (const auto& w : words_of(text)) lengths.push_back(w.size());
  return lengths;
}

}  // namespace

TEST_SUITE("transforms") {

TEST_CASE("remove_special_characters strips punctuation and markers") {
  CHECK(remove_special_characters("Hello, **world**!") == "Hello world");
  CHECK(remove_special_characters("") == "");
  CHECK(remove_special_characters("a\n\n- b   c") == "a b c");
}

TEST_CASE("remove_special_characters keeps contractions, trims edge apostrophes") {
  CHECK(remove_special_characters("don't stop O'Neil's 'quoted'") ==
        "don't stop O'Neil's quoted");
  CHECK(remove_special_characters("it's 42nd, yes") == "it's 42nd yes");
}

TEST_CASE("remove_special_characters drops non-ASCII bytes as separators") {
  CHECK(remove_special_characters("caf\xc3\xa9 au lait") == "caf au lait");
}

TEST_CASE("shuffle_words fixes single words and preserves the multiset") {
  CHECK(shuffle_words("a", 9) == "a");
  auto before = words_of("a b c d e f g");
  auto after = words_of(shuffle_words("a b c d e f g", 5));
  std::sort(before.begin(), before.end());
  std::sort(after.begin(), after.end());
  CHECK(before == after);
  CHECK(shuffle_words("a b c", 7) == shuffle_words("a b c", 7));
}

TEST_CASE("shuffle_letters preserves letter multiset and length pattern") {
  auto out = shuffle_letters("ab", 3);
  CHECK(out.size() == 2);
  CHECK(letters_of(out) == letters_of("ab"));

  auto paired = shuffle_letters("ab cd", 11);
  CHECK(word_lengths(paired) == std::vector<size_t>{2, 2});
  CHECK(letters_of(paired) == letters_of("ab cd"));
  CHECK(shuffle_letters("ab cd ef", 11) == shuffle_letters("ab cd ef", 11));
}

TEST_CASE("shuffle_letters moves letters across word boundaries") {
  // Global pooling: with distinct letters per word, some seed must migrate a
  // letter out of its original word.
  const std::string text = "abc def ghi jkl";
  bool crossed = false;
  for (uint64_t seed = 0; seed < 20 && !crossed; ++seed) {
    auto out = words_of(shuffle_letters(text, seed));
    if (out[0] != "abc" || out[1] != "def") crossed = true;
  }
  CHECK(crossed);
}

TEST_CASE("truncate_tokens takes a prefix") {
  CHECK(truncate_tokens("a b c d", 2) == "a b");
  CHECK(truncate_tokens("a b", 10) == "a b");
  CHECK(truncate_tokens("Certainly! Here is", 1) == "Certainly!");
}

TEST_CASE("markdown_skeleton keeps markers and replaces prose") {
  CHECK(markdown_skeleton("## Title\nSome text") == "## xxx\nxxx");
  CHECK(markdown_skeleton("plain sentence") == "xxx");
  CHECK(markdown_skeleton("- a\n- b **x**") == "- xxx\n- xxx **xxx**");
}

TEST_CASE("markdown_skeleton handles fences and enumerations") {
  CHECK(markdown_skeleton("```python\nx = 1\n```\ntail") == "```xxx\nxxx\n```\nxxx");
  CHECK(markdown_skeleton("1. one\n2) two") == "1. xxx\n2) xxx");
}

TEST_CASE("skeleton preserves element counts") {
  const char* samples[] = {
      "## T\n- a\n- b\n**x** and *i*",
      "1. first\n2. second\n\n```\ncode **not bold**\n```",
      "__strong__ with _em_ inside\n### deep header",
  };
  for (const char* text : samples) {
    auto skeleton = markdown_skeleton(text);
    CHECK(count_elements(skeleton) == count_elements(text));
  }
}

TEST_CASE("spec validation catches missing or extraneous fields") {
  TransformSpec shuffle{TransformKind::shuffle_words, std::nullopt, std::nullopt};
  CHECK_THROWS_AS(shuffle.validate(), ValidationError);
  shuffle.seed = 1;
  CHECK_NOTHROW(shuffle.validate());

  TransformSpec truncate{TransformKind::truncate_tokens, std::nullopt, std::nullopt};
  CHECK_THROWS_AS(truncate.validate(), ValidationError);
  truncate.token_count = 0;
  CHECK_THROWS_AS(truncate.validate(), ValidationError);
  truncate.token_count = 3;
  CHECK_NOTHROW(truncate.validate());

  TransformSpec strip{TransformKind::remove_special, uint64_t{5}, std::nullopt};
  CHECK_THROWS_AS(strip.validate(), ValidationError);
}

TEST_CASE("apply_transform maps every document and keeps identity fields") {
  auto corpus = testsupport::make_labeled_corpus({testsupport::style_a()}, 3, 10, 21);
  TransformSpec spec{TransformKind::remove_special, std::nullopt, std::nullopt};
  auto out = apply_transform(spec, corpus);
  REQUIRE(out.size() == 3);
  for (size_t i = 0; i < out.size(); ++i) {
    CHECK(out.documents()[i].id == corpus.documents()[i].id);
    CHECK(out.documents()[i].label == corpus.documents()[i].label);
    CHECK(out.documents()[i].meta.at("transform") == "remove-special");
  }
}

TEST_CASE("apply_transform truncate k=1 leaves single-token responses") {
  auto corpus = testsupport::make_labeled_corpus({testsupport::style_b()}, 4, 10, 2);
  TransformSpec spec{TransformKind::truncate_tokens, std::nullopt, size_t{1}};
  auto out = apply_transform(spec, corpus);
  for (const auto& doc : out.documents()) CHECK(words_of(doc.response).size() == 1);
}

TEST_CASE("apply_transform shuffling is deterministic per document") {
  auto corpus = testsupport::make_labeled_corpus({testsupport::style_c()}, 4, 12, 8);
  TransformSpec spec{TransformKind::shuffle_words, uint64_t{77}, std::nullopt};
  auto once = apply_transform(spec, corpus);
  auto twice = apply_transform(spec, corpus);
  CHECK(once.documents() == twice.documents());
}

TEST_CASE("document shuffle streams are independent of corpus order") {
  // Keyed per (seed, id): reordering the corpus must not change any
  // document's shuffled text.
  auto corpus = testsupport::make_labeled_corpus({testsupport::style_a()}, 5, 12, 31);
  std::vector<Document> reversed(corpus.documents().rbegin(), corpus.documents().rend());
  Corpus flipped(reversed);

  TransformSpec spec{TransformKind::shuffle_words, uint64_t{123}, std::nullopt};
  auto forward = apply_transform(spec, corpus);
  auto backward = apply_transform(spec, flipped);

  std::map<std::string, std::string> by_id;
  for (const auto& doc : forward.documents()) by_id[doc.id] = doc.response;
  for (const auto& doc : backward.documents()) CHECK(by_id.at(doc.id) == doc.response);
}

TEST_CASE("property suite: 1000 random strings") {
  Rng rng(424242);
  for (int i = 0; i < 1000; ++i) {
    const auto text = testsupport::random_text(rng);

    // remove_special_characters is idempotent.
    const auto cleaned = remove_special_characters(text);
    CHECK(remove_special_characters(cleaned) == cleaned);

    // shuffle_words permutes the word multiset of preprocessed text.
    const uint64_t seed = rng.next();
    auto shuffled = shuffle_words(cleaned, seed);
    auto expect = words_of(cleaned);
    auto got = words_of(shuffled);
    std::sort(expect.begin(), expect.end());
    std::sort(got.begin(), got.end());
    CHECK(expect == got);
    CHECK(shuffle_words(cleaned, seed) == shuffled);

    // shuffle_letters keeps the letter multiset and word-length sequence.
    auto redealt = shuffle_letters(cleaned, seed);
    CHECK(letters_of(redealt) == letters_of(cleaned));
    CHECK(word_lengths(redealt) == word_lengths(cleaned));

    // truncation yields min(k, n) tokens.
    const size_t k = 1 + static_cast<size_t>(rng.below(12));
    const auto truncated = truncate_tokens(text, k);
    CHECK(words_of(truncated).size() == std::min(k, words_of(text).size()));

    // skeleton is idempotent.
    const auto skeleton = markdown_skeleton(text);
    CHECK(markdown_skeleton(skeleton) == skeleton);
  }
}

}  // TEST_SUITE
