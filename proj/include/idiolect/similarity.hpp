#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "idiolect/classifier.hpp"
#include "idiolect/corpus.hpp"
#include "idiolect/features.hpp"

namespace idiolect {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Unigram overlap with clipped counts; tokenization per tokenize().
RougeScore rouge1(std::string_view candidate, std::string_view reference);

// Longest-common-subsequence precision/recall over token sequences.
RougeScore rougeL(std::string_view candidate, std::string_view reference);

enum class RougeMetric { rouge1, rougeL };
enum class PairMode { across, within };

std::string to_string(RougeMetric m);
RougeMetric rouge_metric_from_string(std::string_view s);
std::string to_string(PairMode m);
PairMode pair_mode_from_string(std::string_view s);

// across: mean F1 over all prompt-aligned pairs from any two different
// corpora (>= 2 corpora required). within: mean F1 over all same-prompt
// response pairs inside a single corpus (>= 2 responses per prompt).
double aggregate_pairwise(const std::vector<Corpus>& corpora, RougeMetric metric, PairMode mode);

// Where an excluded model's responses land when attributed by a classifier
// trained on everyone else. Fractions sum to 1 over the remaining labels.
struct PredictionDistribution {
  std::string excluded_label;
  std::map<std::string, double> table;
};

struct LooConfig {
  NgramRange ngram;
  size_t min_df = 1;
  TrainConfig train;
};

// Trains on the training views of every corpus except `excluded`, then
// classifies the excluded corpus's validation view.
PredictionDistribution leave_one_out(const std::map<std::string, Corpus>& corpora,
                                     const std::string& excluded, const LooConfig& config);

}  // namespace idiolect
