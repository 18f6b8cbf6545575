#include "idiolect/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "idiolect/errors.hpp"

namespace idiolect {

using nlohmann::json;

void TrainConfig::validate() const {
  if (l2_lambda < 0.0) throw ValidationError("l2_lambda must be >= 0");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (learning_rate <= 0.0) throw ValidationError("learning_rate must be > 0");
}

namespace {

size_t label_index(const std::vector<std::string>& labels, const std::string& label) {
  auto it = std::lower_bound(labels.begin(), labels.end(), label);
  if (it == labels.end() || *it != label)
    throw ValidationError("label \"" + label + "\" is not in the label set");
  return static_cast<size_t>(it - labels.begin());
}

}  // namespace

Dataset make_dataset(const Corpus& corpus, const Vocabulary& vocab, Split which) {
  auto docs = which == Split::train ? training_documents(corpus) : validation_documents(corpus);
  std::vector<std::string> labels(corpus.labels().begin(), corpus.labels().end());
  return make_dataset(docs, labels, vocab);
}

Dataset make_dataset(const std::vector<const Document*>& docs,
                     const std::vector<std::string>& labels, const Vocabulary& vocab) {
  if (!std::is_sorted(labels.begin(), labels.end()))
    throw ValidationError("dataset label list must be sorted");
  Dataset data;
  data.labels = labels;
  data.x.reserve(docs.size());
  data.y.reserve(docs.size());
  for (const Document* doc : docs) {
    data.x.push_back(tfidf_vector(tokenize(doc->response), vocab));
    data.y.push_back(label_index(labels, doc->label));
  }
  return data;
}

AttributorModel::AttributorModel(std::vector<std::string> labels, size_t dim,
                                 std::string vocab_ref)
    : labels_(std::move(labels)),
      dim_(dim),
      vocab_ref_(std::move(vocab_ref)),
      weights_(labels_.size() * dim, 0.0),
      bias_(labels_.size(), 0.0) {
  if (labels_.size() < 2) throw ValidationError("an attributor needs at least 2 labels");
}

void AttributorModel::save(const std::string& path) const {
  json j{{"format", "idiolect-model"}, {"version", 1},       {"labels", labels_},
         {"vocab_ref", vocab_ref_},    {"dim", dim_},        {"weights", weights_},
         {"bias", bias_}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path);
  out << j.dump(2) << '\n';
}

AttributorModel AttributorModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": malformed JSON: " + e.what());
  }
  if (j.value("format", "") != "idiolect-model" || j.value("version", 0) != 1)
    throw ValidationError(path + ": not a version-1 model file");

  AttributorModel model;
  try {
    model.labels_ = j.at("labels").get<std::vector<std::string>>();
    model.dim_ = j.at("dim").get<size_t>();
    model.vocab_ref_ = j.at("vocab_ref").get<std::string>();
    model.weights_ = j.at("weights").get<std::vector<double>>();
    model.bias_ = j.at("bias").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ValidationError(path + ": bad model fields: " + e.what());
  }
  if (model.labels_.size() < 2) throw ValidationError(path + ": model has fewer than 2 labels");
  if (model.weights_.size() != model.labels_.size() * model.dim_ ||
      model.bias_.size() != model.labels_.size())
    throw ValidationError(path + ": weight shape does not match labels and dim");
  return model;
}

namespace {

// Class scores w_k . x + b_k; x is sparse and already L2-normalized.
std::vector<double> class_scores(const AttributorModel& model, const TfIdfVector& x) {
  const size_t k_classes = model.num_classes();
  std::vector<double> scores(model.bias());
  for (const auto& [idx, value] : x.entries) {
    if (idx >= model.dim())
      throw ValidationError("feature index " + std::to_string(idx) +
                            " exceeds model dimension " + std::to_string(model.dim()));
    for (size_t k = 0; k < k_classes; ++k) scores[k] += model.weight_at(k, idx) * value;
  }
  return scores;
}

void softmax_in_place(std::vector<double>& scores) {
  double peak = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double& s : scores) {
    s = std::exp(s - peak);
    total += s;
  }
  for (double& s : scores) s /= total;
}

}  // namespace

LossGrad loss_and_gradient(const AttributorModel& model, std::span<const TfIdfVector> x,
                           std::span<const size_t> y, double l2_lambda) {
  if (x.empty()) throw ValidationError("loss over an empty batch");
  if (x.size() != y.size()) throw ValidationError("batch vectors and labels differ in length");

  const size_t k_classes = model.num_classes();
  const size_t dim = model.dim();
  LossGrad out;
  out.grad_weights.assign(k_classes * dim, 0.0);
  out.grad_bias.assign(k_classes, 0.0);

  const double inv_b = 1.0 / static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (y[i] >= k_classes)
      throw ValidationError("batch label index " + std::to_string(y[i]) + " out of range");
    auto p = class_scores(model, x[i]);
    softmax_in_place(p);
    out.loss += -std::log(std::max(p[y[i]], 1e-300)) * inv_b;
    for (size_t k = 0; k < k_classes; ++k) {
      const double coeff = (p[k] - (k == y[i] ? 1.0 : 0.0)) * inv_b;
      out.grad_bias[k] += coeff;
      for (const auto& [idx, value] : x[i].entries) out.grad_weights[k * dim + idx] += coeff * value;
    }
  }

  if (l2_lambda > 0.0) {
    double sq = 0.0;
    for (size_t i = 0; i < out.grad_weights.size(); ++i) {
      const double w = model.weights()[i];
      sq += w * w;
      out.grad_weights[i] += l2_lambda * w;
    }
    out.loss += 0.5 * l2_lambda * sq;
  }
  return out;
}

AttributorModel train(const Dataset& data, const Vocabulary& vocab, const TrainConfig& config) {
  config.validate();
  if (data.size() == 0) throw ValidationError("cannot train on an empty dataset");

  std::unordered_set<size_t> present(data.y.begin(), data.y.end());
  if (present.size() < 2)
    throw ValidationError("training data covers fewer than 2 distinct labels");
  for (size_t k = 0; k < data.labels.size(); ++k)
    if (!present.contains(k))
      throw ValidationError("label \"" + data.labels[k] + "\" has no training examples");

  AttributorModel model(data.labels, vocab.size(), vocab.fingerprint());

  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(mix_seeds(config.seed, epoch));
    rng.shuffle(order);
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t stop = std::min(start + config.batch_size, order.size());
      std::vector<TfIdfVector> bx;
      std::vector<size_t> by;
      bx.reserve(stop - start);
      by.reserve(stop - start);
      for (size_t i = start; i < stop; ++i) {
        bx.push_back(data.x[order[i]]);
        by.push_back(data.y[order[i]]);
      }

      auto lg = loss_and_gradient(model, bx, by, config.l2_lambda);
      if (!std::isfinite(lg.loss))
        throw ValidationError("training diverged at epoch " + std::to_string(epoch + 1));
      for (size_t i = 0; i < model.weights().size(); ++i)
        model.weights()[i] -= config.learning_rate * lg.grad_weights[i];
      for (size_t k = 0; k < model.bias().size(); ++k)
        model.bias()[k] -= config.learning_rate * lg.grad_bias[k];
    }
  }
  return model;
}

std::map<std::string, double> predict_proba(const AttributorModel& model, const TfIdfVector& x) {
  auto p = class_scores(model, x);
  softmax_in_place(p);
  std::map<std::string, double> out;
  for (size_t k = 0; k < model.num_classes(); ++k) out[model.labels()[k]] = p[k];
  return out;
}

size_t predict_class(const AttributorModel& model, const TfIdfVector& x) {
  auto scores = class_scores(model, x);
  size_t best = 0;
  for (size_t k = 1; k < scores.size(); ++k)
    if (scores[k] > scores[best]) best = k;
  return best;
}

EvalReport evaluate(const AttributorModel& model, const Dataset& val) {
  if (val.size() == 0) throw ValidationError("cannot evaluate on an empty dataset");

  const size_t k_classes = model.num_classes();
  EvalReport report;
  report.confusion.assign(k_classes, std::vector<int64_t>(k_classes, 0));
  report.n_eval = val.size();

  size_t correct = 0;
  for (size_t i = 0; i < val.size(); ++i) {
    const std::string& true_label = val.labels.at(val.y[i]);
    const size_t truth = label_index(model.labels(), true_label);
    const size_t pred = predict_class(model, val.x[i]);
    ++report.confusion[truth][pred];
    if (truth == pred) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(val.size());
  return report;
}

std::map<std::string, PhraseList> characteristic_phrases(const AttributorModel& model,
                                                         const Vocabulary& vocab,
                                                         const Corpus& train_corpus,
                                                         size_t top_k, size_t exclude_top_m) {
  if (vocab.size() != model.dim())
    throw ValidationError("vocabulary size does not match model dimension");
  if (vocab.fingerprint() != model.vocab_ref())
    throw ValidationError("vocabulary fingerprint does not match the model's vocab_ref");

  auto common = top_words(training_documents(train_corpus), exclude_top_m);
  std::unordered_set<std::string_view> excluded(common.begin(), common.end());

  std::vector<size_t> kept;
  kept.reserve(vocab.size());
  for (size_t t = 0; t < vocab.size(); ++t)
    if (!excluded.contains(vocab.terms()[t])) kept.push_back(t);

  std::map<std::string, PhraseList> out;
  for (size_t k = 0; k < model.num_classes(); ++k) {
    std::vector<size_t> ranked = kept;
    std::stable_sort(ranked.begin(), ranked.end(), [&](size_t a, size_t b) {
      return model.weight_at(k, a) > model.weight_at(k, b);
    });
    PhraseList list;
    list.truncated = ranked.size() < top_k;
    if (ranked.size() > top_k) ranked.resize(top_k);
    for (size_t t : ranked) list.phrases.push_back(vocab.terms()[t]);
    out[model.labels()[k]] = std::move(list);
  }
  return out;
}

}  // namespace idiolect
