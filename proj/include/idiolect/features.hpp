#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "idiolect/corpus.hpp"

namespace idiolect {

// Lowercased tokens split on any character that is not an ASCII letter,
// digit, or word-internal apostrophe.
std::vector<std::string> tokenize(std::string_view text);

// All n-grams of the token list for n in [lo, hi], joined with single
// spaces, in text order.
struct NgramRange {
  int lo = 1;
  int hi = 2;
};
std::vector<std::string> ngrams(const std::vector<std::string>& tokens, NgramRange range);

// N-gram term index over a training corpus. Terms are sorted
// lexicographically; doc_freq counts documents containing the term at least
// once. Immutable after build.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Builds from the corpus's training view (train-tagged documents when a
  // split is present, all documents otherwise). Terms below min_df are
  // dropped.
  static Vocabulary build(const Corpus& corpus, NgramRange range, size_t min_df);
  static Vocabulary build(const std::vector<const Document*>& docs, NgramRange range,
                          size_t min_df);

  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<uint64_t>& doc_freqs() const { return doc_freq_; }
  size_t size() const { return terms_.size(); }
  uint64_t n_docs() const { return n_docs_; }
  NgramRange ngram_range() const { return range_; }

  std::optional<size_t> find(std::string_view term) const;
  uint64_t doc_freq(size_t term_index) const { return doc_freq_[term_index]; }

  // Stable content hash used as the model's vocab_ref.
  std::string fingerprint() const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, size_t> index_;
  std::vector<uint64_t> doc_freq_;
  uint64_t n_docs_ = 0;
  NgramRange range_;
};

// Sparse L2-normalized TF-IDF vector. `norm` is the L2 length before
// normalization (0 for an all-OOV document).
struct TfIdfVector {
  std::vector<std::pair<uint32_t, double>> entries;  // sorted by index
  double norm = 0.0;
};

// weight(t) = tf(t) * (ln((1 + n_docs) / (1 + doc_freq[t])) + 1), with raw
// in-document term counts; the result is L2-normalized. Out-of-vocabulary
// terms are ignored.
TfIdfVector tfidf_vector(const std::vector<std::string>& tokens, const Vocabulary& vocab);

enum class ProfileKind { word, letter, first_word };

std::string to_string(ProfileKind k);
ProfileKind profile_kind_from_string(std::string_view s);

// item -> relative frequency; sums to 1 when nonempty.
struct FrequencyProfile {
  ProfileKind kind;
  std::map<std::string, double> table;
};

// word: over all tokens of the label's responses. letter: over a-z,
// case-folded. first_word: over the first token of each response (token-less
// responses are skipped).
FrequencyProfile frequency_profile(const Corpus& corpus, const std::string& label,
                                   ProfileKind kind);

// The m most frequent unigrams over every response in the document set,
// ties broken lexicographically. Used to drop common words before ranking
// characteristic phrases.
std::vector<std::string> top_words(const std::vector<const Document*>& docs, size_t m);

}  // namespace idiolect
