#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "idiolect/classifier.hpp"
#include "idiolect/corpus.hpp"
#include "idiolect/errors.hpp"
#include "idiolect/features.hpp"
#include "idiolect/llm_client.hpp"
#include "idiolect/markdown.hpp"
#include "idiolect/rng.hpp"
#include "idiolect/similarity.hpp"
#include "idiolect/transforms.hpp"

namespace py = pybind11;
using namespace idiolect;

namespace {

std::vector<Document> deref(const std::vector<const Document*>& docs) {
  std::vector<Document> out;
  out.reserve(docs.size());
  for (const Document* doc : docs) out.push_back(*doc);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fingerprinting and attribution of LLM-generated text";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<TransportError>(m, "TransportError", PyExc_RuntimeError);

  m.attr("DEFAULT_SEED") = k_default_seed;

  // ---- corpus ----
  py::enum_<Split>(m, "Split")
      .value("train", Split::train)
      .value("val", Split::val);

  py::class_<Document>(m, "Document")
      .def(py::init([](std::string id, std::string prompt, std::string response,
                       std::string label, std::map<std::string, std::string> meta,
                       std::optional<Split> split) {
             Document d;
             d.id = std::move(id);
             d.prompt = std::move(prompt);
             d.response = std::move(response);
             d.label = std::move(label);
             d.meta = std::move(meta);
             d.split = split;
             return d;
           }),
           py::arg("id"), py::arg("prompt"), py::arg("response"), py::arg("label"),
           py::arg("meta") = std::map<std::string, std::string>{},
           py::arg("split") = std::nullopt)
      .def_readwrite("id", &Document::id)
      .def_readwrite("prompt", &Document::prompt)
      .def_readwrite("response", &Document::response)
      .def_readwrite("label", &Document::label)
      .def_readwrite("meta", &Document::meta)
      .def_readwrite("split", &Document::split)
      .def("__eq__", [](const Document& a, const Document& b) { return a == b; });

  py::class_<Corpus>(m, "Corpus")
      .def(py::init<>())
      .def(py::init<std::vector<Document>>(), py::arg("documents"))
      .def_property_readonly("documents",
                             [](const Corpus& c) { return c.documents(); })
      .def_property_readonly("labels", [](const Corpus& c) { return c.labels(); })
      .def("__len__", &Corpus::size)
      .def_property_readonly("has_split", &Corpus::has_split)
      .def("with_label",
           [](const Corpus& c, const std::string& label) { return deref(c.with_label(label)); },
           py::arg("label"));

  m.def("load_jsonl", &load_jsonl, py::arg("path"));
  m.def("save_jsonl", &save_jsonl, py::arg("corpus"), py::arg("path"));
  m.def("split_corpus", &split_corpus, py::arg("corpus"), py::arg("train_n"), py::arg("val_n"),
        py::arg("seed") = k_default_seed);
  m.def("align_by_prompt", &align_by_prompt, py::arg("corpora"));
  m.def("training_documents",
        [](const Corpus& c) { return deref(training_documents(c)); }, py::arg("corpus"));
  m.def("validation_documents",
        [](const Corpus& c) { return deref(validation_documents(c)); }, py::arg("corpus"));

  // ---- transforms ----
  m.def("remove_special_characters", &remove_special_characters, py::arg("text"));
  m.def("shuffle_words", &shuffle_words, py::arg("text"), py::arg("seed"));
  m.def("shuffle_letters", &shuffle_letters, py::arg("text"), py::arg("seed"));
  m.def("truncate_tokens", &truncate_tokens, py::arg("text"), py::arg("k"));
  m.def("markdown_skeleton", &markdown_skeleton, py::arg("text"));
  m.def(
      "apply_transform",
      [](const std::string& kind, const Corpus& corpus, std::optional<uint64_t> seed,
         std::optional<size_t> token_count) {
        TransformSpec spec;
        spec.kind = transform_kind_from_string(kind);
        spec.seed = seed;
        spec.token_count = token_count;
        return apply_transform(spec, corpus);
      },
      py::arg("kind"), py::arg("corpus"), py::arg("seed") = std::nullopt,
      py::arg("token_count") = std::nullopt);

  // ---- markdown ----
  py::class_<MarkdownCounts>(m, "MarkdownCounts")
      .def_readonly("bold", &MarkdownCounts::bold)
      .def_readonly("italic", &MarkdownCounts::italic)
      .def_readonly("header", &MarkdownCounts::header)
      .def_readonly("enumeration", &MarkdownCounts::enumeration)
      .def_readonly("bullet", &MarkdownCounts::bullet)
      .def_readonly("code_block", &MarkdownCounts::code_block)
      .def("__repr__", [](const MarkdownCounts& c) {
        return "MarkdownCounts(bold=" + std::to_string(c.bold) +
               ", italic=" + std::to_string(c.italic) + ", header=" + std::to_string(c.header) +
               ", enumeration=" + std::to_string(c.enumeration) +
               ", bullet=" + std::to_string(c.bullet) +
               ", code_block=" + std::to_string(c.code_block) + ")";
      });

  m.def("count_markdown_elements", &count_elements, py::arg("text"));
  m.def(
      "element_histogram",
      [](const Corpus& corpus, const std::string& label, const std::string& element) {
        return element_histogram(corpus, label, markdown_element_from_string(element));
      },
      py::arg("corpus"), py::arg("label"), py::arg("element"));

  // ---- features ----
  m.def("tokenize", &tokenize, py::arg("text"));
  m.def(
      "ngrams",
      [](const std::vector<std::string>& tokens, int lo, int hi) {
        return ngrams(tokens, NgramRange{lo, hi});
      },
      py::arg("tokens"), py::arg("lo") = 1, py::arg("hi") = 2);

  py::class_<Vocabulary>(m, "Vocabulary")
      .def_static(
          "build",
          [](const Corpus& corpus, int lo, int hi, size_t min_df) {
            return Vocabulary::build(corpus, NgramRange{lo, hi}, min_df);
          },
          py::arg("corpus"), py::arg("lo") = 1, py::arg("hi") = 2, py::arg("min_df") = 1)
      .def_property_readonly("terms", [](const Vocabulary& v) { return v.terms(); })
      .def_property_readonly("doc_freqs", [](const Vocabulary& v) { return v.doc_freqs(); })
      .def("__len__", &Vocabulary::size)
      .def_property_readonly("n_docs", &Vocabulary::n_docs)
      .def("find", &Vocabulary::find, py::arg("term"))
      .def("fingerprint", &Vocabulary::fingerprint)
      .def("save", &Vocabulary::save, py::arg("path"))
      .def_static("load", &Vocabulary::load, py::arg("path"));

  py::class_<TfIdfVector>(m, "TfIdfVector")
      .def_readonly("entries", &TfIdfVector::entries)
      .def_readonly("norm", &TfIdfVector::norm);

  m.def("tfidf_vector", &tfidf_vector, py::arg("tokens"), py::arg("vocab"));
  m.def(
      "frequency_profile",
      [](const Corpus& corpus, const std::string& label, const std::string& kind) {
        return frequency_profile(corpus, label, profile_kind_from_string(kind)).table;
      },
      py::arg("corpus"), py::arg("label"), py::arg("kind"));

  // ---- classifier ----
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("l2_lambda", &TrainConfig::l2_lambda)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("x", &Dataset::x)
      .def_readonly("y", &Dataset::y)
      .def_readonly("labels", &Dataset::labels)
      .def("__len__", &Dataset::size);

  m.def(
      "make_dataset",
      [](const Corpus& corpus, const Vocabulary& vocab, Split which) {
        return make_dataset(corpus, vocab, which);
      },
      py::arg("corpus"), py::arg("vocab"), py::arg("which"));

  py::class_<AttributorModel>(m, "AttributorModel")
      .def_property_readonly("labels",
                             [](const AttributorModel& m_) { return m_.labels(); })
      .def_property_readonly("dim", &AttributorModel::dim)
      .def_property_readonly("num_classes", &AttributorModel::num_classes)
      .def_property_readonly("vocab_ref",
                             [](const AttributorModel& m_) { return m_.vocab_ref(); })
      .def("weight_at", &AttributorModel::weight_at, py::arg("cls"), py::arg("feature"))
      .def("save", &AttributorModel::save, py::arg("path"))
      .def_static("load", &AttributorModel::load, py::arg("path"));

  m.def("train", &train, py::arg("data"), py::arg("vocab"), py::arg("config") = TrainConfig{});
  m.def("predict_proba", &predict_proba, py::arg("model"), py::arg("x"));
  m.def("predict_class", &predict_class, py::arg("model"), py::arg("x"));

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("accuracy", &EvalReport::accuracy)
      .def_readonly("confusion", &EvalReport::confusion)
      .def_readonly("n_eval", &EvalReport::n_eval);

  m.def("evaluate", &evaluate, py::arg("model"), py::arg("val"));

  py::class_<PhraseList>(m, "PhraseList")
      .def_readonly("phrases", &PhraseList::phrases)
      .def_readonly("truncated", &PhraseList::truncated);

  m.def("characteristic_phrases", &characteristic_phrases, py::arg("model"), py::arg("vocab"),
        py::arg("train_corpus"), py::arg("top_k") = 10, py::arg("exclude_top_m") = 20);

  // ---- similarity ----
  py::class_<RougeScore>(m, "RougeScore")
      .def_readonly("precision", &RougeScore::precision)
      .def_readonly("recall", &RougeScore::recall)
      .def_readonly("f1", &RougeScore::f1);

  m.def("rouge1", &rouge1, py::arg("candidate"), py::arg("reference"));
  m.def("rougeL", &rougeL, py::arg("candidate"), py::arg("reference"));
  m.def(
      "aggregate_pairwise",
      [](const std::vector<Corpus>& corpora, const std::string& metric,
         const std::string& mode) {
        return aggregate_pairwise(corpora, rouge_metric_from_string(metric),
                                  pair_mode_from_string(mode));
      },
      py::arg("corpora"), py::arg("metric") = "rouge1", py::arg("mode") = "across");

  py::class_<PredictionDistribution>(m, "PredictionDistribution")
      .def_readonly("excluded_label", &PredictionDistribution::excluded_label)
      .def_readonly("table", &PredictionDistribution::table);

  m.def(
      "leave_one_out",
      [](const std::map<std::string, Corpus>& corpora, const std::string& excluded, int lo,
         int hi, size_t min_df, const TrainConfig& train_config) {
        LooConfig config;
        config.ngram = NgramRange{lo, hi};
        config.min_df = min_df;
        config.train = train_config;
        return leave_one_out(corpora, excluded, config);
      },
      py::arg("corpora"), py::arg("excluded"), py::arg("lo") = 1, py::arg("hi") = 2,
      py::arg("min_df") = 1, py::arg("train_config") = TrainConfig{});

  // ---- prompt-level constants and helpers ----
  m.attr("LENGTH_INSTRUCTION") = k_length_instruction;
  m.attr("FORMAT_INSTRUCTION") = k_format_instruction;
  m.attr("ANALYSIS_PROMPT") = k_default_analysis_prompt;
  m.attr("SUMMARY_PROMPT") = k_default_summary_prompt;

  m.def(
      "apply_intervention",
      [](const std::string& prompt, const std::string& intervention) {
        return apply_intervention(prompt, intervention_from_string(intervention));
      },
      py::arg("prompt"), py::arg("intervention"));
  m.def(
      "rewrite_instruction",
      [](const std::string& mode) { return rewrite_instruction(rewrite_mode_from_string(mode)); },
      py::arg("mode"));
  m.def(
      "judge_pair_prompt",
      [](const std::string& a, const std::string& b, uint64_t seed, uint64_t pair_seed) {
        JudgeRun run;
        run.seed = seed;
        bool first_is_a = true;
        auto prompt = judge_pair_prompt(a, b, run, pair_seed, &first_is_a);
        return py::make_tuple(prompt, first_is_a);
      },
      py::arg("response_a"), py::arg("response_b"), py::arg("seed") = k_default_seed,
      py::arg("pair_seed") = 0);
}
