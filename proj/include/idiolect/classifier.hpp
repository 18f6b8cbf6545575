#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "idiolect/corpus.hpp"
#include "idiolect/features.hpp"
#include "idiolect/rng.hpp"

namespace idiolect {

struct TrainConfig {
  double l2_lambda = 1e-4;
  size_t epochs = 30;
  size_t batch_size = 64;
  double learning_rate = 0.5;
  uint64_t seed = k_default_seed;

  void validate() const;
};

// TF-IDF vectors with label indices into `labels` (sorted label names).
struct Dataset {
  std::vector<TfIdfVector> x;
  std::vector<size_t> y;
  std::vector<std::string> labels;

  size_t size() const { return x.size(); }
};

// Vectorizes the corpus's training or validation view against a vocabulary.
Dataset make_dataset(const Corpus& corpus, const Vocabulary& vocab, Split which);
Dataset make_dataset(const std::vector<const Document*>& docs,
                     const std::vector<std::string>& labels, const Vocabulary& vocab);

// K-way multinomial logistic-regression attributor: a K x D weight matrix
// (row-major) plus per-class bias, tied to a vocabulary fingerprint.
class AttributorModel {
 public:
  AttributorModel() = default;
  AttributorModel(std::vector<std::string> labels, size_t dim, std::string vocab_ref);

  size_t num_classes() const { return labels_.size(); }
  size_t dim() const { return dim_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& vocab_ref() const { return vocab_ref_; }

  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& bias() const { return bias_; }

  double weight_at(size_t cls, size_t feature) const { return weights_[cls * dim_ + feature]; }

  void save(const std::string& path) const;
  static AttributorModel load(const std::string& path);

 private:
  std::vector<std::string> labels_;
  size_t dim_ = 0;
  std::string vocab_ref_;
  std::vector<double> weights_;  // K * D, row-major
  std::vector<double> bias_;     // K
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad_weights;  // K * D, row-major
  std::vector<double> grad_bias;     // K
};

// Mean cross-entropy of softmax(W x + b) over the batch plus
// (l2_lambda / 2) * ||W||^2, and its exact gradient. Bias is unregularized.
LossGrad loss_and_gradient(const AttributorModel& model, std::span<const TfIdfVector> x,
                           std::span<const size_t> y, double l2_lambda);

// Seeded mini-batch gradient descent from zero weights; deterministic for a
// fixed config. Throws on single-label data and on non-finite loss.
AttributorModel train(const Dataset& data, const Vocabulary& vocab, const TrainConfig& config);

// Softmax distribution over the model's labels.
std::map<std::string, double> predict_proba(const AttributorModel& model, const TfIdfVector& x);

// Argmax class index, ties broken by lowest label index.
size_t predict_class(const AttributorModel& model, const TfIdfVector& x);

struct EvalReport {
  double accuracy = 0.0;
  std::vector<std::vector<int64_t>> confusion;  // row = true, column = predicted
  size_t n_eval = 0;
};

EvalReport evaluate(const AttributorModel& model, const Dataset& val);

struct PhraseList {
  std::vector<std::string> phrases;
  bool truncated = false;  // fewer than top_k terms remained after exclusion
};

// Per label, vocabulary terms ranked by descending coefficient. Terms that
// are among the training corpus's exclude_top_m most frequent unigrams are
// removed before ranking; bigrams are never excluded.
std::map<std::string, PhraseList> characteristic_phrases(const AttributorModel& model,
                                                         const Vocabulary& vocab,
                                                         const Corpus& train_corpus,
                                                         size_t top_k, size_t exclude_top_m);

}  // namespace idiolect
