#include "idiolect/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "idiolect/errors.hpp"
#include "idiolect/rng.hpp"

namespace idiolect {

using nlohmann::json;

std::string to_string(Split s) { return s == Split::train ? "train" : "val"; }

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  throw ValidationError("unknown split tag \"" + std::string(s) + "\" (expected train or val)");
}

namespace {

bool empty_response_allowed(const Document& doc) {
  return doc.meta.contains("generation_error") || doc.meta.contains("transform");
}

void validate_documents(const std::vector<Document>& docs) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(docs.size());
  size_t tagged = 0;
  for (const auto& doc : docs) {
    if (doc.id.empty()) throw ValidationError("document with empty id");
    if (!seen.insert(doc.id).second)
      throw ValidationError("duplicate document id \"" + doc.id + "\"");
    if (doc.label.empty()) throw ValidationError("document \"" + doc.id + "\" has empty label");
    if (doc.response.empty() && !empty_response_allowed(doc))
      throw ValidationError("document \"" + doc.id +
                            "\" has an empty response without a generation-failure marker");
    if (doc.split) ++tagged;
  }
  if (tagged != 0 && tagged != docs.size())
    throw ValidationError("split tags must cover every document or none");
}

}  // namespace

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
  validate_documents(documents_);
  std::set<std::string> labels;
  for (const auto& doc : documents_) labels.insert(doc.label);
  labels_.assign(labels.begin(), labels.end());
}

bool Corpus::has_label(std::string_view label) const {
  return std::binary_search(labels_.begin(), labels_.end(), label);
}

std::vector<const Document*> Corpus::with_label(std::string_view label) const {
  std::vector<const Document*> out;
  for (const auto& doc : documents_)
    if (doc.label == label) out.push_back(&doc);
  return out;
}

namespace {

std::string require_string(const json& record, const char* field, const std::string& where) {
  auto it = record.find(field);
  if (it == record.end())
    throw ValidationError(where + ": missing required field \"" + field + "\"");
  if (!it->is_string())
    throw ValidationError(where + ": field \"" + field + "\" must be a string");
  return it->get<std::string>();
}

}  // namespace

Corpus load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);

  std::vector<Document> docs;
  std::unordered_map<std::string, size_t> line_of_id;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no);

    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(where + ": malformed JSON: " + e.what());
    }
    if (!record.is_object()) throw ParseError(where + ": record is not a JSON object");

    Document doc;
    doc.id = require_string(record, "id", where);
    doc.prompt = require_string(record, "prompt", where);
    doc.response = require_string(record, "response", where);
    doc.label = require_string(record, "model", where);

    if (auto it = record.find("meta"); it != record.end()) {
      if (!it->is_object()) throw ValidationError(where + ": field \"meta\" must be an object");
      for (const auto& [key, value] : it->items())
        doc.meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
    if (auto it = record.find("split"); it != record.end()) {
      if (!it->is_string()) throw ValidationError(where + ": field \"split\" must be a string");
      doc.split = split_from_string(it->get<std::string>());
    }

    if (auto [pos, inserted] = line_of_id.try_emplace(doc.id, line_no); !inserted)
      throw ValidationError(where + ": duplicate document id \"" + doc.id + "\" (first seen at line " +
                            std::to_string(pos->second) + ")");
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs));
}

void save_jsonl(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path);
  for (const auto& doc : corpus.documents()) {
    json record{{"id", doc.id}, {"prompt", doc.prompt}, {"response", doc.response},
                {"model", doc.label}};
    if (!doc.meta.empty()) record["meta"] = doc.meta;
    if (doc.split) record["split"] = to_string(*doc.split);
    out << record.dump() << '\n';
  }
  if (!out) throw ParseError("short write to " + path);
}

Corpus split_corpus(const Corpus& corpus, size_t train_n, size_t val_n, uint64_t seed) {
  // Local per-label positions get one seeded permutation each, restarted
  // from the same seed, so labels of equal size split by identical indices.
  std::unordered_map<std::string_view, std::vector<size_t>> by_label;
  const auto& docs = corpus.documents();
  for (size_t i = 0; i < docs.size(); ++i) by_label[docs[i].label].push_back(i);

  std::vector<std::optional<Split>> assignment(docs.size());
  for (const auto& label : corpus.labels()) {
    const auto& positions = by_label[label];
    if (positions.size() < train_n + val_n)
      throw ValidationError("label \"" + std::string(label) + "\" has " +
                            std::to_string(positions.size()) + " documents, need " +
                            std::to_string(train_n) + " train + " + std::to_string(val_n) +
                            " val");
    std::vector<size_t> order(positions.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    for (size_t i = 0; i < train_n; ++i) assignment[positions[order[i]]] = Split::train;
    for (size_t i = 0; i < val_n; ++i) assignment[positions[order[train_n + i]]] = Split::val;
  }

  std::vector<Document> selected;
  selected.reserve(corpus.labels().size() * (train_n + val_n));
  for (size_t i = 0; i < docs.size(); ++i) {
    if (!assignment[i]) continue;
    Document doc = docs[i];
    doc.split = assignment[i];
    selected.push_back(std::move(doc));
  }
  return Corpus(std::move(selected));
}

std::vector<std::vector<Document>> align_by_prompt(const std::vector<Corpus>& corpora) {
  if (corpora.empty()) return {};

  // prompt -> occurrence-ordered document positions, per corpus
  std::vector<std::map<std::string_view, std::vector<size_t>>> groups(corpora.size());
  for (size_t c = 0; c < corpora.size(); ++c) {
    const auto& docs = corpora[c].documents();
    for (size_t i = 0; i < docs.size(); ++i) groups[c][docs[i].prompt].push_back(i);
  }

  for (size_t c = 1; c < corpora.size(); ++c) {
    for (const auto& [prompt, positions] : groups[0]) {
      auto it = groups[c].find(prompt);
      if (it == groups[c].end() || it->second.size() != positions.size()) {
        const auto& exemplar = corpora[0].documents()[positions.front()];
        throw ValidationError("prompt alignment failed: prompt of document \"" + exemplar.id +
                              "\" occurs " + std::to_string(positions.size()) +
                              " time(s) in corpus 0 but " +
                              std::to_string(it == groups[c].end() ? 0 : it->second.size()) +
                              " time(s) in corpus " + std::to_string(c));
      }
    }
    for (const auto& [prompt, positions] : groups[c]) {
      if (!groups[0].contains(prompt)) {
        const auto& exemplar = corpora[c].documents()[positions.front()];
        throw ValidationError("prompt alignment failed: prompt of document \"" + exemplar.id +
                              "\" in corpus " + std::to_string(c) + " is missing from corpus 0");
      }
    }
  }

  std::vector<std::vector<Document>> tuples;
  for (const auto& [prompt, positions] : groups[0]) {
    for (size_t occurrence = 0; occurrence < positions.size(); ++occurrence) {
      std::vector<Document> tuple;
      tuple.reserve(corpora.size());
      for (size_t c = 0; c < corpora.size(); ++c)
        tuple.push_back(corpora[c].documents()[groups[c][prompt][occurrence]]);
      tuples.push_back(std::move(tuple));
    }
  }
  return tuples;
}

namespace {

std::vector<const Document*> view(const Corpus& corpus, Split which) {
  std::vector<const Document*> out;
  for (const auto& doc : corpus.documents())
    if (!corpus.has_split() || doc.split == which) out.push_back(&doc);
  return out;
}

}  // namespace

std::vector<const Document*> training_documents(const Corpus& corpus) {
  return view(corpus, Split::train);
}

std::vector<const Document*> validation_documents(const Corpus& corpus) {
  return view(corpus, Split::val);
}

}  // namespace idiolect
