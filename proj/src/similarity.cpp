#include "idiolect/similarity.hpp"

#include <algorithm>
#include <unordered_map>

#include "idiolect/errors.hpp"

namespace idiolect {

namespace {

RougeScore with_f1(double precision, double recall) {
  RougeScore s{precision, recall, 0.0};
  if (precision + recall > 0.0) s.f1 = 2.0 * precision * recall / (precision + recall);
  return s;
}

}  // namespace

RougeScore rouge1(std::string_view candidate, std::string_view reference) {
  auto cand = tokenize(candidate);
  auto ref = tokenize(reference);
  if (cand.empty() || ref.empty()) return {};

  std::unordered_map<std::string_view, int64_t> ref_counts;
  for (const auto& t : ref) ++ref_counts[t];
  int64_t overlap = 0;
  for (const auto& t : cand) {
    auto it = ref_counts.find(t);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return with_f1(static_cast<double>(overlap) / static_cast<double>(cand.size()),
                 static_cast<double>(overlap) / static_cast<double>(ref.size()));
}

RougeScore rougeL(std::string_view candidate, std::string_view reference) {
  auto cand = tokenize(candidate);
  auto ref = tokenize(reference);
  if (cand.empty() || ref.empty()) return {};

  // Two-row LCS table over token sequences.
  std::vector<int64_t> prev(ref.size() + 1, 0), cur(ref.size() + 1, 0);
  for (size_t i = 1; i <= cand.size(); ++i) {
    for (size_t j = 1; j <= ref.size(); ++j) {
      cur[j] = cand[i - 1] == ref[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const int64_t lcs = prev[ref.size()];
  return with_f1(static_cast<double>(lcs) / static_cast<double>(cand.size()),
                 static_cast<double>(lcs) / static_cast<double>(ref.size()));
}

std::string to_string(RougeMetric m) {
  return m == RougeMetric::rouge1 ? "rouge1" : "rougel";
}

RougeMetric rouge_metric_from_string(std::string_view s) {
  if (s == "rouge1") return RougeMetric::rouge1;
  if (s == "rougel") return RougeMetric::rougeL;
  throw ValidationError("unknown metric \"" + std::string(s) + "\" (expected rouge1 or rougel)");
}

std::string to_string(PairMode m) { return m == PairMode::across ? "across" : "within"; }

PairMode pair_mode_from_string(std::string_view s) {
  if (s == "across") return PairMode::across;
  if (s == "within") return PairMode::within;
  throw ValidationError("unknown pair mode \"" + std::string(s) + "\" (expected across or within)");
}

double aggregate_pairwise(const std::vector<Corpus>& corpora, RougeMetric metric, PairMode mode) {
  auto score = [&](const std::string& a, const std::string& b) {
    return (metric == RougeMetric::rouge1 ? rouge1(a, b) : rougeL(a, b)).f1;
  };

  double total = 0.0;
  size_t pairs = 0;

  if (mode == PairMode::across) {
    if (corpora.size() < 2)
      throw ValidationError("across-model similarity needs at least 2 corpora");
    for (const auto& tuple : align_by_prompt(corpora)) {
      for (size_t i = 0; i < tuple.size(); ++i) {
        for (size_t j = i + 1; j < tuple.size(); ++j) {
          total += score(tuple[i].response, tuple[j].response);
          ++pairs;
        }
      }
    }
  } else {
    // All unordered same-prompt pairs inside each corpus; documents from
    // different corpora are never paired.
    for (const auto& corpus : corpora) {
      std::map<std::string_view, std::vector<const Document*>> by_prompt;
      for (const auto& doc : corpus.documents()) by_prompt[doc.prompt].push_back(&doc);
      for (const auto& [prompt, docs] : by_prompt) {
        for (size_t i = 0; i < docs.size(); ++i) {
          for (size_t j = i + 1; j < docs.size(); ++j) {
            total += score(docs[i]->response, docs[j]->response);
            ++pairs;
          }
        }
      }
    }
  }

  if (pairs == 0)
    throw ValidationError(mode == PairMode::across
                              ? "no prompt-aligned response pairs to compare"
                              : "within-model similarity needs >= 2 responses per prompt");
  return total / static_cast<double>(pairs);
}

PredictionDistribution leave_one_out(const std::map<std::string, Corpus>& corpora,
                                     const std::string& excluded, const LooConfig& config) {
  auto excluded_it = corpora.find(excluded);
  if (excluded_it == corpora.end())
    throw ValidationError("excluded label \"" + excluded + "\" is not among the corpora");
  if (corpora.size() < 3)
    throw ValidationError("leave-one-out needs at least 3 labeled corpora");

  // The map keys are the class labels; document label fields are ignored so
  // corpora exported by other tools attribute cleanly.
  std::vector<std::string> labels;
  std::vector<const Document*> train_docs;
  std::vector<size_t> train_y;
  for (const auto& [label, corpus] : corpora) {
    if (label == excluded) continue;
    const size_t k = labels.size();
    labels.push_back(label);
    for (const Document* doc : training_documents(corpus)) {
      train_docs.push_back(doc);
      train_y.push_back(k);
    }
  }

  auto vocab = Vocabulary::build(train_docs, config.ngram, config.min_df);
  Dataset data;
  data.labels = labels;
  data.x.reserve(train_docs.size());
  for (const Document* doc : train_docs) data.x.push_back(tfidf_vector(tokenize(doc->response), vocab));
  data.y = std::move(train_y);

  auto model = train(data, vocab, config.train);

  auto val_docs = validation_documents(excluded_it->second);
  if (val_docs.empty())
    throw ValidationError("excluded corpus \"" + excluded + "\" has no validation documents");

  PredictionDistribution dist;
  dist.excluded_label = excluded;
  for (const auto& label : labels) dist.table[label] = 0.0;
  for (const Document* doc : val_docs) {
    const size_t pred = predict_class(model, tfidf_vector(tokenize(doc->response), vocab));
    dist.table[model.labels()[pred]] += 1.0;
  }
  for (auto& [label, fraction] : dist.table)
    fraction /= static_cast<double>(val_docs.size());
  return dist;
}

}  // namespace idiolect
