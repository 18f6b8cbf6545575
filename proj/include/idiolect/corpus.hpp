#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace idiolect {

enum class Split { train, val };

std::string to_string(Split s);
Split split_from_string(std::string_view s);

// One prompt/response pair with a source-model label. `meta` is an open
// string map (dataset name, sampling params, failure markers). An empty
// response is only legal when meta carries "generation_error" (a recorded
// generation failure) or "transform" (a transform may legitimately empty a
// response).
struct Document {
  std::string id;
  std::string prompt;
  std::string response;
  std::string label;
  std::map<std::string, std::string> meta;
  std::optional<Split> split;

  bool operator==(const Document&) const = default;
};

// Ordered, immutable collection of documents. `labels()` is the sorted set
// of distinct document labels. Split tags are all-or-none: either every
// document carries one or none does.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> documents);

  const std::vector<Document>& documents() const { return documents_; }
  const std::vector<std::string>& labels() const { return labels_; }
  size_t size() const { return documents_.size(); }
  bool has_split() const { return !documents_.empty() && documents_.front().split.has_value(); }
  bool has_label(std::string_view label) const;

  std::vector<const Document*> with_label(std::string_view label) const;

 private:
  std::vector<Document> documents_;
  std::vector<std::string> labels_;
};

// JSONL ingest/persist. One UTF-8 object per line with keys id, prompt,
// response, model (all strings), optional meta (object) and split
// ("train"/"val"). Errors carry the 1-based line number.
Corpus load_jsonl(const std::string& path);
void save_jsonl(const Corpus& corpus, const std::string& path);

// Per label, tags exactly train_n documents "train" and val_n "val", chosen
// by a seeded shuffle of that label's document positions. Documents beyond
// train_n + val_n are left out of the result. Labels with equally many
// documents receive the same index permutation, so prompt-aligned corpora
// split identically.
Corpus split_corpus(const Corpus& corpus, size_t train_n, size_t val_n, uint64_t seed);

// Prompt-aligned document tuples, one document per corpus per prompt, in
// lexicographic prompt order. Duplicate prompts pair up by occurrence order.
// All corpora must share an identical multiset of prompts.
std::vector<std::vector<Document>> align_by_prompt(const std::vector<Corpus>& corpora);

// Fitting/evaluation views: the tagged subset when a split is present, all
// documents otherwise.
std::vector<const Document*> training_documents(const Corpus& corpus);
std::vector<const Document*> validation_documents(const Corpus& corpus);

}  // namespace idiolect
