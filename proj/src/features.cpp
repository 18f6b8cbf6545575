#include "idiolect/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "idiolect/errors.hpp"
#include "idiolect/rng.hpp"

namespace idiolect {

using nlohmann::json;

namespace {

bool is_token_byte(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char fold(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    size_t lo = 0, hi = word.size();
    while (lo < hi && word[lo] == '\'') ++lo;
    while (hi > lo && word[hi - 1] == '\'') --hi;
    if (hi > lo) tokens.push_back(word.substr(lo, hi - lo));
    word.clear();
  };
  for (char c : text) {
    if (is_token_byte(c) || c == '\'')
      word += fold(c);
    else
      flush();
  }
  flush();
  return tokens;
}

std::vector<std::string> ngrams(const std::vector<std::string>& tokens, NgramRange range) {
  if (range.lo < 1 || range.hi < range.lo)
    throw ValidationError("invalid n-gram range [" + std::to_string(range.lo) + ", " +
                          std::to_string(range.hi) + "]");
  std::vector<std::string> out;
  for (int n = range.lo; n <= range.hi; ++n) {
    if (tokens.size() < static_cast<size_t>(n)) break;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (size_t j = 1; j < static_cast<size_t>(n); ++j) {
        gram += ' ';
        gram += tokens[i + j];
      }
      out.push_back(std::move(gram));
    }
  }
  return out;
}

Vocabulary Vocabulary::build(const Corpus& corpus, NgramRange range, size_t min_df) {
  return build(training_documents(corpus), range, min_df);
}

Vocabulary Vocabulary::build(const std::vector<const Document*>& docs, NgramRange range,
                             size_t min_df) {
  if (docs.empty()) throw ValidationError("cannot build a vocabulary from zero documents");

  std::map<std::string, uint64_t> freq;
  for (const Document* doc : docs) {
    auto grams = ngrams(tokenize(doc->response), range);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++freq[std::move(g)];
  }

  Vocabulary vocab;
  vocab.range_ = range;
  vocab.n_docs_ = docs.size();
  for (auto& [term, df] : freq) {
    if (df < min_df) continue;
    vocab.index_.emplace(term, vocab.terms_.size());
    vocab.terms_.push_back(term);
    vocab.doc_freq_.push_back(df);
  }
  return vocab;
}

std::optional<size_t> Vocabulary::find(std::string_view term) const {
  auto it = index_.find(std::string(term));
  return it == index_.end() ? std::nullopt : std::optional<size_t>(it->second);
}

std::string Vocabulary::fingerprint() const {
  uint64_t h = fnv1a64("idiolect-vocab");
  auto mix = [&](std::string_view s) { h = splitmix64(h ^ fnv1a64(s)); };
  mix(std::to_string(range_.lo));
  mix(std::to_string(range_.hi));
  mix(std::to_string(n_docs_));
  for (size_t i = 0; i < terms_.size(); ++i) {
    mix(terms_[i]);
    mix(std::to_string(doc_freq_[i]));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void Vocabulary::save(const std::string& path) const {
  json j{{"format", "idiolect-vocab"},
         {"version", 1},
         {"ngram_range", {range_.lo, range_.hi}},
         {"n_docs", n_docs_},
         {"terms", terms_},
         {"doc_freq", doc_freq_}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path);
  out << j.dump(2) << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": malformed JSON: " + e.what());
  }
  if (j.value("format", "") != "idiolect-vocab" || j.value("version", 0) != 1)
    throw ValidationError(path + ": not a version-1 vocabulary file");

  Vocabulary vocab;
  try {
    vocab.range_ = {j.at("ngram_range").at(0).get<int>(), j.at("ngram_range").at(1).get<int>()};
    vocab.n_docs_ = j.at("n_docs").get<uint64_t>();
    vocab.terms_ = j.at("terms").get<std::vector<std::string>>();
    vocab.doc_freq_ = j.at("doc_freq").get<std::vector<uint64_t>>();
  } catch (const json::exception& e) {
    throw ValidationError(path + ": bad vocabulary fields: " + e.what());
  }
  if (vocab.terms_.size() != vocab.doc_freq_.size())
    throw ValidationError(path + ": terms and doc_freq lengths differ");
  if (!std::is_sorted(vocab.terms_.begin(), vocab.terms_.end()) ||
      std::adjacent_find(vocab.terms_.begin(), vocab.terms_.end()) != vocab.terms_.end())
    throw ValidationError(path + ": terms must be sorted and unique");
  for (uint64_t df : vocab.doc_freq_)
    if (df < 1 || df > vocab.n_docs_)
      throw ValidationError(path + ": doc_freq out of range [1, n_docs]");
  for (size_t i = 0; i < vocab.terms_.size(); ++i) vocab.index_.emplace(vocab.terms_[i], i);
  return vocab;
}

TfIdfVector tfidf_vector(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  std::map<size_t, double> counts;
  for (const auto& gram : ngrams(tokens, vocab.ngram_range()))
    if (auto idx = vocab.find(gram)) ++counts[*idx];

  TfIdfVector vec;
  vec.entries.reserve(counts.size());
  double sq = 0.0;
  for (const auto& [idx, tf] : counts) {
    double idf = std::log((1.0 + static_cast<double>(vocab.n_docs())) /
                          (1.0 + static_cast<double>(vocab.doc_freq(idx)))) +
                 1.0;
    double w = tf * idf;
    vec.entries.emplace_back(static_cast<uint32_t>(idx), w);
    sq += w * w;
  }
  vec.norm = std::sqrt(sq);
  if (vec.norm > 0.0)
    for (auto& [idx, w] : vec.entries) w /= vec.norm;
  return vec;
}

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::word: return "word";
    case ProfileKind::letter: return "letter";
    case ProfileKind::first_word: return "first-word";
  }
  throw ValidationError("invalid profile kind");
}

ProfileKind profile_kind_from_string(std::string_view s) {
  if (s == "word") return ProfileKind::word;
  if (s == "letter") return ProfileKind::letter;
  if (s == "first-word") return ProfileKind::first_word;
  throw ValidationError("unknown profile kind \"" + std::string(s) + "\"");
}

FrequencyProfile frequency_profile(const Corpus& corpus, const std::string& label,
                                   ProfileKind kind) {
  auto docs = corpus.with_label(label);
  if (docs.empty())
    throw ValidationError("label \"" + label + "\" has no documents in this corpus");

  FrequencyProfile profile{kind, {}};
  uint64_t total = 0;
  for (const Document* doc : docs) {
    switch (kind) {
      case ProfileKind::word:
        for (auto& tok : tokenize(doc->response)) {
          ++profile.table[tok];
          ++total;
        }
        break;
      case ProfileKind::letter:
        for (char c : doc->response) {
          char f = fold(c);
          if (f >= 'a' && f <= 'z') {
            ++profile.table[std::string(1, f)];
            ++total;
          }
        }
        break;
      case ProfileKind::first_word: {
        auto toks = tokenize(doc->response);
        if (!toks.empty()) {
          ++profile.table[toks.front()];
          ++total;
        }
        break;
      }
    }
  }
  for (auto& [item, f] : profile.table) f /= static_cast<double>(total);
  return profile;
}

std::vector<std::string> top_words(const std::vector<const Document*>& docs, size_t m) {
  std::map<std::string, uint64_t> freq;
  for (const Document* doc : docs)
    for (auto& tok : tokenize(doc->response)) ++freq[tok];

  std::vector<std::pair<std::string_view, uint64_t>> ranked;
  ranked.reserve(freq.size());
  for (const auto& [word, count] : freq) ranked.emplace_back(word, count);
  // Map order is lexicographic, so a stable sort on count alone keeps the
  // documented tie-break.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > m) ranked.resize(m);

  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (const auto& [word, count] : ranked) out.emplace_back(word);
  return out;
}

}  // namespace idiolect
