#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "idiolect/classifier.hpp"
#include "idiolect/errors.hpp"
#include "idiolect/rng.hpp"
#include "support/synthetic.hpp"

using namespace idiolect;

namespace {

TfIdfVector sparse(std::initializer_list<std::pair<uint32_t, double>> entries) {
  TfIdfVector v;
  double sum_sq = 0.0;
  for (const auto& [idx, w] : entries) {
    v.entries.emplace_back(idx, w);
    sum_sq += w * w;
  }
  v.norm = std::sqrt(sum_sq);
  return v;
}

AttributorModel random_model(Rng& rng, std::vector<std::string> labels, size_t dim) {
  AttributorModel model(std::move(labels), dim, "test-ref");
  for (auto& w : model.weights()) w = rng.unit() * 2.0 - 1.0;
  for (auto& b : model.bias()) b = rng.unit() * 2.0 - 1.0;
  return model;
}

TfIdfVector random_vector(Rng& rng, size_t dim) {
  TfIdfVector v;
  double sum_sq = 0.0;
  for (size_t i = 0; i < dim; ++i) {
    if (rng.unit() < 0.6) continue;
    const double w = rng.unit();
    v.entries.emplace_back(static_cast<uint32_t>(i), w);
    sum_sq += w * w;
  }
  const double norm = std::sqrt(sum_sq);
  if (norm > 0)
    for (auto& [idx, w] : v.entries) w /= norm;
  v.norm = norm;
  return v;
}

}  // namespace

TEST_SUITE("classifier") {

TEST_CASE("zero-weight loss is ln K") {
  for (size_t k : {2, 3, 5}) {
    std::vector<std::string> labels;
    for (size_t i = 0; i < k; ++i) labels.push_back("label" + std::to_string(i));
    AttributorModel model(labels, 4, "ref");
    std::vector<TfIdfVector> x{sparse({{0, 0.6}, {2, 0.8}}), sparse({{1, 1.0}})};
    std::vector<size_t> y{0, k - 1};
    auto lg = loss_and_gradient(model, x, y, 0.0);
    CHECK(std::abs(lg.loss - std::log(static_cast<double>(k))) <= 1e-12);
  }
}

TEST_CASE("l2 penalty contributes nothing at zero weights") {
  AttributorModel model({"a", "b"}, 3, "ref");
  std::vector<TfIdfVector> x{sparse({{0, 1.0}})};
  std::vector<size_t> y{1};
  auto without = loss_and_gradient(model, x, y, 0.0);
  auto with = loss_and_gradient(model, x, y, 10.0);
  CHECK(without.loss == doctest::Approx(with.loss).epsilon(1e-15));
}

TEST_CASE("gradient matches central finite differences on a 3x5 model") {
  Rng rng(5150);
  auto model = random_model(rng, {"a", "b", "c"}, 5);
  std::vector<TfIdfVector> x;
  std::vector<size_t> y;
  for (int i = 0; i < 8; ++i) {
    x.push_back(random_vector(rng, 5));
    y.push_back(static_cast<size_t>(rng.below(3)));
  }
  CHECK(testsupport::gradient_max_rel_err(model, x, y, 1e-3) < 1e-4);
}

TEST_CASE("gradient check across 20 random models and batches") {
  Rng rng(8080);
  for (int round = 0; round < 20; ++round) {
    const size_t k = 2 + static_cast<size_t>(rng.below(3));
    const size_t dim = 3 + static_cast<size_t>(rng.below(6));
    std::vector<std::string> labels;
    for (size_t i = 0; i < k; ++i) labels.push_back("label" + std::to_string(i));
    auto model = random_model(rng, labels, dim);

    const size_t batch = 1 + static_cast<size_t>(rng.below(10));
    std::vector<TfIdfVector> x;
    std::vector<size_t> y;
    for (size_t i = 0; i < batch; ++i) {
      x.push_back(random_vector(rng, dim));
      y.push_back(static_cast<size_t>(rng.below(k)));
    }
    const double lambda = rng.unit() < 0.5 ? 0.0 : 0.01 * rng.unit();
    CHECK(testsupport::gradient_max_rel_err(model, x, y, lambda) < 1e-4);
  }
}

TEST_CASE("loss errors on bad batches") {
  AttributorModel model({"a", "b"}, 2, "ref");
  std::vector<TfIdfVector> x{sparse({{0, 1.0}})};
  CHECK_THROWS_AS(loss_and_gradient(model, {}, {}, 0.0), ValidationError);
  CHECK_THROWS_AS(loss_and_gradient(model, x, std::vector<size_t>{5}, 0.0), ValidationError);
  CHECK_THROWS_AS(
      loss_and_gradient(model, x, std::vector<size_t>{0, 1}, 0.0), ValidationError);
}

TEST_CASE("training separates four separable points") {
  Corpus corpus({[] {
                   Document d;
                   d.id = "a1";
                   d.prompt = "p";
                   d.response = "alpha alpha";
                   d.label = "A";
                   return d;
                 }(),
                 [] {
                   Document d;
                   d.id = "a2";
                   d.prompt = "p";
                   d.response = "alpha beta alpha";
                   d.label = "A";
                   return d;
                 }(),
                 [] {
                   Document d;
                   d.id = "b1";
                   d.prompt = "p";
                   d.response = "gamma gamma";
                   d.label = "B";
                   return d;
                 }(),
                 [] {
                   Document d;
                   d.id = "b2";
                   d.prompt = "p";
                   d.response = "gamma delta";
                   d.label = "B";
                   return d;
                 }()});
  auto vocab = Vocabulary::build(corpus, {1, 1}, 1);
  auto data = make_dataset(corpus, vocab, Split::train);
  TrainConfig config;
  config.epochs = 50;
  auto model = train(data, vocab, config);
  auto report = evaluate(model, data);
  CHECK(report.accuracy == doctest::Approx(1.0));
}

TEST_CASE("zero epochs yields uniform probabilities") {
  auto corpus = testsupport::make_labeled_corpus(
      {testsupport::style_a(), testsupport::style_b()}, 4, 8, 44);
  auto vocab = Vocabulary::build(corpus, {1, 1}, 1);
  auto data = make_dataset(corpus, vocab, Split::train);
  TrainConfig config;
  config.epochs = 0;
  auto model = train(data, vocab, config);
  auto proba = predict_proba(model, data.x[0]);
  for (const auto& [label, p] : proba) CHECK(p == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("training is deterministic") {
  auto corpus = testsupport::make_labeled_corpus(
      {testsupport::style_a(), testsupport::style_c()}, 10, 15, 17);
  auto vocab = Vocabulary::build(corpus, {1, 2}, 1);
  auto data = make_dataset(corpus, vocab, Split::train);
  TrainConfig config;
  config.epochs = 5;
  auto once = train(data, vocab, config);
  auto twice = train(data, vocab, config);
  CHECK(once.weights() == twice.weights());
  CHECK(once.bias() == twice.bias());
}

TEST_CASE("single-label training data is rejected") {
  auto corpus = testsupport::make_labeled_corpus({testsupport::style_a()}, 4, 8, 2);
  auto vocab = Vocabulary::build(corpus, {1, 1}, 1);
  auto data = make_dataset(corpus, vocab, Split::train);
  CHECK_THROWS_AS(train(data, vocab, TrainConfig{}), ValidationError);
}

TEST_CASE("full-batch loss is non-increasing at a small learning rate") {
  auto corpus = testsupport::make_labeled_corpus(
      {testsupport::style_a(), testsupport::style_b()}, 12, 12, 23);
  auto vocab = Vocabulary::build(corpus, {1, 1}, 1);
  auto data = make_dataset(corpus, vocab, Split::train);

  TrainConfig config;
  config.batch_size = data.size();  // full batch
  config.learning_rate = 0.05;
  config.l2_lambda = 1e-4;
  double previous = std::log(2.0) + 1.0;  // above the initial ln 2
  for (size_t epochs = 0; epochs <= 10; epochs += 2) {
    config.epochs = epochs;
    auto model = train(data, vocab, config);
    std::vector<TfIdfVector> x = data.x;
    std::vector<size_t> y = data.y;
    const double loss = loss_and_gradient(model, x, y, config.l2_lambda).loss;
    CHECK(loss <= previous + 1e-12);
    previous = loss;
  }
}

TEST_CASE("uniform scores over five balanced classes sit at chance") {
  std::vector<std::string> labels{"c1", "c2", "c3", "c4", "c5"};
  AttributorModel model(labels, 6, "ref");  // zero weights: every class ties
  // With all-equal scores the argmax tie-break picks class 0, so accuracy on
  // balanced data is exactly chance = 1/5.
  Dataset val;
  val.labels = labels;
  Rng rng(31);
  for (size_t i = 0; i < 500; ++i) {
    val.x.push_back(random_vector(rng, 6));
    val.y.push_back(i % 5);
  }
  auto report = evaluate(model, val);
  CHECK(report.accuracy == doctest::Approx(0.2));
  CHECK(report.n_eval == 500);
}

TEST_CASE("confusion rows sum to per-class counts and accuracy is the trace ratio") {
  auto corpus = testsupport::make_labeled_corpus(
      {testsupport::style_a(), testsupport::style_b(), testsupport::style_c()}, 20, 15, 7);
  auto tagged = split_corpus(corpus, 14, 6, 3);
  auto vocab = Vocabulary::build(tagged, {1, 2}, 1);
  auto model = train(make_dataset(tagged, vocab, Split::train), vocab, TrainConfig{});
  auto val = make_dataset(tagged, vocab, Split::val);
  auto report = evaluate(model, val);

  int64_t diagonal = 0, total = 0;
  for (size_t i = 0; i < report.confusion.size(); ++i) {
    int64_t row = 0;
    for (size_t j = 0; j < report.confusion[i].size(); ++j) {
      row += report.confusion[i][j];
      total += report.confusion[i][j];
      if (i == j) diagonal += report.confusion[i][j];
    }
    CHECK(row == 6);  // per-class validation count
  }
  CHECK(total == static_cast<int64_t>(report.n_eval));
  CHECK(report.accuracy ==
        doctest::Approx(static_cast<double>(diagonal) / static_cast<double>(total)));
}

TEST_CASE("scaling all weights preserves argmax predictions") {
  Rng rng(272);
  auto model = random_model(rng, {"a", "b", "c"}, 8);
  for (auto& b : model.bias()) b = 0.0;  // scale applies to weights only
  auto scaled = model;
  for (auto& w : scaled.weights()) w *= 3.5;
  for (int i = 0; i < 100; ++i) {
    auto x = random_vector(rng, 8);
    CHECK(predict_class(model, x) == predict_class(scaled, x));
  }
}

TEST_CASE("probabilities sum to one for random inputs") {
  Rng rng(99);
  auto model = random_model(rng, {"a", "b", "c", "d"}, 10);
  for (int i = 0; i < 100; ++i) {
    auto proba = predict_proba(model, random_vector(rng, 10));
    double total = 0.0;
    for (const auto& [label, p] : proba) total += p;
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("constructed weights drive the argmax") {
  AttributorModel model({"A", "B"}, 2, "ref");
  model.weights() = {5.0, 0.0, 0.0, 5.0};  // row-major 2x2
  auto proba = predict_proba(model, sparse({{0, 1.0}}));
  CHECK(proba.at("A") > proba.at("B"));
  CHECK(predict_class(model, sparse({{1, 1.0}})) == 1);
}

TEST_CASE("dimension mismatch is an error") {
  AttributorModel model({"a", "b"}, 2, "ref");
  CHECK_THROWS_AS(predict_proba(model, sparse({{7, 1.0}})), ValidationError);
}

TEST_CASE("model persists and reloads identically") {
  auto corpus = testsupport::make_labeled_corpus(
      {testsupport::style_a(), testsupport::style_b()}, 6, 10, 11);
  auto vocab = Vocabulary::build(corpus, {1, 1}, 1);
  TrainConfig config;
  config.epochs = 3;
  auto model = train(make_dataset(corpus, vocab, Split::train), vocab, config);
  auto path = (std::filesystem::temp_directory_path() / "model_roundtrip.json").string();
  model.save(path);
  auto loaded = AttributorModel::load(path);
  CHECK(loaded.labels() == model.labels());
  CHECK(loaded.weights() == model.weights());
  CHECK(loaded.bias() == model.bias());
  CHECK(loaded.vocab_ref() == model.vocab_ref());
}

TEST_CASE("characteristic phrases surface planted tokens") {
  // Every class-A document contains "zephyrblend", absent from B.
  std::vector<Document> docs;
  Rng rng(64);
  for (int i = 0; i < 12; ++i) {
    Document d;
    d.id = "a" + std::to_string(i);
    d.prompt = "p" + std::to_string(i);
    d.response = "zephyrblend the of to and common words here";
    d.label = "A";
    docs.push_back(d);
    Document e;
    e.id = "b" + std::to_string(i);
    e.prompt = "p" + std::to_string(i);
    e.response = "quartzfall the of to and common words here";
    e.label = "B";
    docs.push_back(e);
  }
  Corpus corpus(docs);
  auto vocab = Vocabulary::build(corpus, {1, 1}, 1);
  TrainConfig config;
  config.epochs = 40;
  auto model = train(make_dataset(corpus, vocab, Split::train), vocab, config);

  auto lists = characteristic_phrases(model, vocab, corpus, 3, 5);
  REQUIRE(lists.count("A") == 1);
  REQUIRE(!lists.at("A").phrases.empty());
  CHECK(lists.at("A").phrases[0] == "zephyrblend");
  CHECK(lists.at("B").phrases[0] == "quartzfall");

  // The shared filler is more frequent than the planted tokens, so a top-5
  // exclusion must not remove them.
  auto unfiltered = characteristic_phrases(model, vocab, corpus, 100, 0);
  CHECK(unfiltered.at("A").phrases.size() == vocab.size());
  CHECK(unfiltered.at("A").truncated);
}

TEST_CASE("exclusion removes only common unigrams") {
  std::vector<Document> docs;
  for (int i = 0; i < 4; ++i) {
    Document d;
    d.id = "a" + std::to_string(i);
    d.prompt = "p";
    d.response = "filler filler alpha mark";
    d.label = "A";
    docs.push_back(d);
    Document e;
    e.id = "b" + std::to_string(i);
    e.prompt = "p";
    e.response = "filler filler beta mark";
    e.label = "B";
    docs.push_back(e);
  }
  Corpus corpus(docs);
  auto vocab = Vocabulary::build(corpus, {1, 1}, 1);
  TrainConfig config;
  config.epochs = 30;
  auto model = train(make_dataset(corpus, vocab, Split::train), vocab, config);

  // "filler" tops the frequency table; excluding the top-1 word must drop it
  // from every ranked list while keeping the rest.
  auto lists = characteristic_phrases(model, vocab, corpus, 10, 1);
  for (const auto& [label, list] : lists)
    for (const auto& phrase : list.phrases) CHECK(phrase != "filler");
}

}  // TEST_SUITE
