#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "idiolect/corpus.hpp"

namespace idiolect {

enum class TransformKind {
  remove_special,
  shuffle_words,
  shuffle_letters,
  truncate_tokens,
  markdown_skeleton,
};

std::string to_string(TransformKind k);
TransformKind transform_kind_from_string(std::string_view s);

struct TransformSpec {
  TransformKind kind;
  std::optional<uint64_t> seed;          // required for the shuffles
  std::optional<size_t> token_count;     // required (>= 1) for truncation

  // Throws ValidationError when a required field is missing or out of range.
  void validate() const;
};

// Keeps ASCII letters, digits, and word-internal apostrophes; everything
// else (punctuation, markdown markers, non-ASCII bytes, excess whitespace)
// becomes a single-space separator. Idempotent.
std::string remove_special_characters(std::string_view text);

// Seeded uniform permutation of the whitespace-delimited words.
std::string shuffle_words(std::string_view text, uint64_t seed);

// Pools every letter across the whole text, permutes the pool, and redeals
// it into the original word-length pattern.
std::string shuffle_letters(std::string_view text, uint64_t seed);

// First k whitespace-delimited tokens, joined by single spaces.
std::string truncate_tokens(std::string_view text, size_t k);

// Keeps the markdown markers of the six counted element kinds in place and
// replaces every maximal run of other text with the literal "xxx". Line
// structure is preserved; idempotent.
std::string markdown_skeleton(std::string_view text);

// Applies the transform to every response. Ids, labels, and split tags are
// preserved; shuffles draw one independent stream per document keyed by
// (seed, document id). Each transformed document gains meta["transform"].
Corpus apply_transform(const TransformSpec& spec, const Corpus& corpus);

}  // namespace idiolect
