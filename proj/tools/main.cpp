// Command-line front end: each verb wires the library into one pipeline
// stage and drops a .manifest.json next to its primary output so any run
// can be replayed byte-for-byte from the recorded argv.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "idiolect/classifier.hpp"
#include "idiolect/corpus.hpp"
#include "idiolect/errors.hpp"
#include "idiolect/features.hpp"
#include "idiolect/llm_client.hpp"
#include "idiolect/markdown.hpp"
#include "idiolect/rng.hpp"
#include "idiolect/similarity.hpp"
#include "idiolect/transforms.hpp"

namespace {

using idiolect::ParseError;
using idiolect::TransportError;
using idiolect::ValidationError;
using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw ValidationError("failed to format a number");
  return std::string(buf, p);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path);
  return out;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(idiolect::fnv1a64(bytes)));
  return buf;
}

std::vector<std::string> g_argv;

// No timestamps on purpose: replaying the argv must reproduce the manifest
// too.
void write_manifest(const std::string& verb, const json& options,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, const std::string& primary_out) {
  json m;
  m["command"] = verb;
  m["argv"] = g_argv;
  m["options"] = options;
  auto& in_hashes = m["inputs"] = json::object();
  for (const auto& path : inputs) in_hashes[path] = file_hash(path);
  m["outputs"] = outputs;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(idiolect::fnv1a64(options.dump())));
  m["config_hash"] = buf;
  auto out = open_out(primary_out + ".manifest.json");
  out << m.dump(2) << '\n';
}

idiolect::NgramRange parse_ngram(const std::string& text) {
  idiolect::NgramRange range;
  auto comma = text.find(',');
  try {
    if (comma == std::string::npos) {
      range.lo = range.hi = std::stoi(text);
    } else {
      range.lo = std::stoi(text.substr(0, comma));
      range.hi = std::stoi(text.substr(comma + 1));
    }
  } catch (const std::exception&) {
    throw ValidationError("bad --ngram value \"" + text + "\" (expected lo,hi)");
  }
  if (range.lo < 1 || range.hi < range.lo)
    throw ValidationError("bad --ngram value \"" + text + "\" (need 1 <= lo <= hi)");
  return range;
}

// Vocabulary selection shared by train/eval/phrases/featurize: an existing
// file is loaded; a missing path is built from the corpus's training view
// and saved there.
idiolect::Vocabulary obtain_vocab(const std::string& path, const idiolect::Corpus& corpus,
                                  idiolect::NgramRange range, size_t min_df, bool rebuild,
                                  bool* built_out) {
  std::ifstream probe(path);
  if (probe && !rebuild) {
    if (built_out) *built_out = false;
    return idiolect::Vocabulary::load(path);
  }
  auto vocab = idiolect::Vocabulary::build(corpus, range, min_df);
  vocab.save(path);
  if (built_out) *built_out = true;
  return vocab;
}

idiolect::EndpointConfig endpoint_from(const std::string& base_url, const std::string& model,
                                       const std::string& api_key_env, double temperature,
                                       const std::vector<std::string>& params) {
  idiolect::EndpointConfig config;
  config.base_url = base_url;
  config.model_name = model;
  config.api_key_env = api_key_env;
  config.temperature = temperature;
  for (const auto& kv : params) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ValidationError("bad --param \"" + kv + "\" (expected name=value)");
    double value = 0.0;
    auto [p, ec] = std::from_chars(kv.data() + eq + 1, kv.data() + kv.size(), value);
    if (ec != std::errc{} || p != kv.data() + kv.size())
      throw ValidationError("bad --param value in \"" + kv + "\" (expected a number)");
    config.extra_params[kv.substr(0, eq)] = value;
  }
  config.validate();
  return config;
}

json endpoint_options(const idiolect::EndpointConfig& c) {
  // The key itself is never recorded, only the variable name.
  json j{{"base_url", c.base_url},
         {"model", c.model_name},
         {"api_key_env", c.api_key_env},
         {"temperature", c.temperature}};
  for (const auto& [k, v] : c.extra_params) j["param_" + k] = v;
  return j;
}

std::vector<idiolect::PromptRecord> load_prompts(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<idiolect::PromptRecord> prompts;
  std::string line;
  size_t line_no = 0;
  bool jsonl = false, decided = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!decided) {
      jsonl = line[line.find_first_not_of(" \t\r")] == '{';
      decided = true;
    }
    if (!jsonl) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      prompts.push_back({"", line});
      continue;
    }
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    if (!record.is_object() || !record.contains("prompt") || !record["prompt"].is_string())
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": prompt record needs a string \"prompt\" field");
    idiolect::PromptRecord rec;
    rec.text = record["prompt"].get<std::string>();
    if (record.contains("id")) {
      if (!record["id"].is_string())
        throw ValidationError(path + ":" + std::to_string(line_no) + ": \"id\" must be a string");
      rec.id = record["id"].get<std::string>();
    }
    prompts.push_back(std::move(rec));
  }
  if (prompts.empty()) throw ValidationError(path + ": no prompts found");
  return prompts;
}

void append_document_jsonl(std::ofstream& out, const idiolect::Document& doc) {
  json record{{"id", doc.id}, {"prompt", doc.prompt}, {"response", doc.response},
              {"model", doc.label}};
  if (!doc.meta.empty()) record["meta"] = doc.meta;
  if (doc.split) record["split"] = to_string(*doc.split);
  out << record.dump() << '\n';
  out.flush();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

constexpr const char* k_elements[] = {"bold", "italic", "header", "enumeration", "bullet",
                                      "code_block"};

}  // namespace

int main(int argc, char** argv) {
  g_argv.assign(argv, argv + argc);

  CLI::App app{"Fingerprint and attribute LLM-generated text"};
  app.require_subcommand(1);

  // ---- ingest ----
  struct IngestOpts {
    std::string in, out;
  };
  auto ingest = std::make_shared<IngestOpts>();
  {
    auto* cmd = app.add_subcommand("ingest", "Validate and normalize a JSONL corpus");
    cmd->add_option("--in", ingest->in, "input corpus (JSONL)")->required();
    cmd->add_option("--out", ingest->out, "normalized corpus path")->required();
    cmd->callback([ingest] {
      auto corpus = idiolect::load_jsonl(ingest->in);
      idiolect::save_jsonl(corpus, ingest->out);
      write_manifest("ingest", {{"in", ingest->in}, {"out", ingest->out}}, {ingest->in},
                     {ingest->out}, ingest->out);
      std::cout << "documents=" << corpus.size() << " labels=" << corpus.labels().size()
                << '\n';
    });
  }

  // ---- split ----
  struct SplitOpts {
    std::string in, out;
    size_t train_n = 0, val_n = 0;
    uint64_t seed = idiolect::k_default_seed;
  };
  auto split = std::make_shared<SplitOpts>();
  {
    auto* cmd = app.add_subcommand("split", "Tag per-label train/val subsets");
    cmd->add_option("--in", split->in, "input corpus")->required();
    cmd->add_option("--out", split->out, "tagged corpus path")->required();
    cmd->add_option("--train", split->train_n, "train documents per label")->required();
    cmd->add_option("--val", split->val_n, "validation documents per label")->required();
    cmd->add_option("--seed", split->seed, "shuffle seed");
    cmd->callback([split] {
      auto corpus = idiolect::load_jsonl(split->in);
      auto tagged = idiolect::split_corpus(corpus, split->train_n, split->val_n, split->seed);
      idiolect::save_jsonl(tagged, split->out);
      write_manifest("split",
                     {{"in", split->in},
                      {"out", split->out},
                      {"train", split->train_n},
                      {"val", split->val_n},
                      {"seed", split->seed}},
                     {split->in}, {split->out}, split->out);
      std::cout << "selected=" << tagged.size() << '\n';
    });
  }

  // ---- transform ----
  struct TransformOpts {
    std::string in, out, kind;
    uint64_t seed = idiolect::k_default_seed;
    bool seed_given = false;
    size_t tokens = 0;
  };
  auto trans = std::make_shared<TransformOpts>();
  {
    auto* cmd = app.add_subcommand("transform", "Apply a controlled text transformation");
    cmd->add_option("--kind", trans->kind,
                    "remove-special | shuffle-words | shuffle-letters | truncate-tokens | "
                    "markdown-skeleton")
        ->required();
    cmd->add_option("--in", trans->in, "input corpus")->required();
    cmd->add_option("--out", trans->out, "transformed corpus path")->required();
    auto* seed_opt = cmd->add_option("--seed", trans->seed, "shuffle seed");
    cmd->add_option("--tokens", trans->tokens, "token count for truncate-tokens");
    cmd->callback([trans, seed_opt] {
      trans->seed_given = seed_opt->count() > 0;
      idiolect::TransformSpec spec;
      spec.kind = idiolect::transform_kind_from_string(trans->kind);
      const bool is_shuffle = spec.kind == idiolect::TransformKind::shuffle_words ||
                              spec.kind == idiolect::TransformKind::shuffle_letters;
      if (is_shuffle) spec.seed = trans->seed;
      if (spec.kind == idiolect::TransformKind::truncate_tokens) spec.token_count = trans->tokens;
      spec.validate();

      auto corpus = idiolect::load_jsonl(trans->in);
      idiolect::save_jsonl(idiolect::apply_transform(spec, corpus), trans->out);

      json options{{"in", trans->in}, {"out", trans->out}, {"kind", trans->kind}};
      if (is_shuffle) {
        options["seed"] = trans->seed;
        options["seed_defaulted"] = !trans->seed_given;
      }
      if (spec.token_count) options["tokens"] = *spec.token_count;
      write_manifest("transform", options, {trans->in}, {trans->out}, trans->out);
    });
  }

  // ---- markdown-stats ----
  struct MdOpts {
    std::string in, out, hist;
  };
  auto md = std::make_shared<MdOpts>();
  {
    auto* cmd = app.add_subcommand("markdown-stats",
                                   "Count markdown formatting elements per document");
    cmd->add_option("--in", md->in, "input corpus")->required();
    cmd->add_option("--out", md->out, "per-document counts CSV")->required();
    cmd->add_option("--hist", md->hist,
                    "per-label histogram CSV (default: <out> with .hist.csv suffix)");
    cmd->callback([md] {
      auto corpus = idiolect::load_jsonl(md->in);
      std::string hist_path = md->hist.empty() ? md->out + ".hist.csv" : md->hist;

      auto out = open_out(md->out);
      out << "id,label,bold,italic,header,enumeration,bullet,code_block\n";
      for (const auto& doc : corpus.documents()) {
        auto c = idiolect::count_elements(doc.response);
        out << csv_field(doc.id) << ',' << csv_field(doc.label) << ',' << c.bold << ','
            << c.italic << ',' << c.header << ',' << c.enumeration << ',' << c.bullet << ','
            << c.code_block << '\n';
      }

      auto hist = open_out(hist_path);
      hist << "label,element,count,density\n";
      for (const auto& label : corpus.labels()) {
        for (const char* name : k_elements) {
          auto table = idiolect::element_histogram(
              corpus, label, idiolect::markdown_element_from_string(name));
          for (const auto& [count, density] : table)
            hist << csv_field(label) << ',' << name << ',' << count << ',' << fmt(density)
                 << '\n';
        }
      }

      write_manifest("markdown-stats",
                     {{"in", md->in}, {"out", md->out}, {"hist", hist_path}}, {md->in},
                     {md->out, hist_path}, md->out);
    });
  }

  // ---- featurize ----
  struct FeatOpts {
    std::string in, vocab, out, ngram = "1,2";
    size_t min_df = 1;
    bool build_vocab = false;
  };
  auto feat = std::make_shared<FeatOpts>();
  {
    auto* cmd = app.add_subcommand("featurize", "TF-IDF vectors in sparse index:weight format");
    cmd->add_option("--in", feat->in, "input corpus")->required();
    cmd->add_option("--vocab", feat->vocab, "vocabulary JSON (loaded, or built when missing)")
        ->required();
    cmd->add_option("--out", feat->out, "sparse vector file")->required();
    cmd->add_option("--ngram", feat->ngram, "n-gram range lo,hi (build only)");
    cmd->add_option("--min-df", feat->min_df, "minimum document frequency (build only)");
    cmd->add_flag("--build-vocab", feat->build_vocab,
                  "rebuild the vocabulary from the corpus's training view");
    cmd->callback([feat] {
      auto corpus = idiolect::load_jsonl(feat->in);
      bool built = false;
      auto vocab = obtain_vocab(feat->vocab, corpus, parse_ngram(feat->ngram), feat->min_df,
                                feat->build_vocab, &built);

      auto out = open_out(feat->out);
      for (const auto& doc : corpus.documents()) {
        if (doc.label.find(' ') != std::string::npos)
          throw ValidationError("label \"" + doc.label +
                                "\" contains a space and cannot head a sparse vector line");
        out << doc.label;
        auto vec = idiolect::tfidf_vector(idiolect::tokenize(doc.response), vocab);
        for (const auto& [idx, w] : vec.entries) out << ' ' << idx << ':' << fmt(w);
        out << '\n';
      }

      std::vector<std::string> inputs{feat->in};
      std::vector<std::string> outputs{feat->out};
      if (built)
        outputs.push_back(feat->vocab);
      else
        inputs.push_back(feat->vocab);
      write_manifest("featurize",
                     {{"in", feat->in},
                      {"vocab", feat->vocab},
                      {"out", feat->out},
                      {"ngram", feat->ngram},
                      {"min_df", feat->min_df},
                      {"built_vocab", built}},
                     inputs, outputs, feat->out);
    });
  }

  // ---- freq ----
  struct FreqOpts {
    std::string in, out, kind, label;
  };
  auto freq = std::make_shared<FreqOpts>();
  {
    auto* cmd = app.add_subcommand("freq", "Word, letter, or first-word frequency profiles");
    cmd->add_option("--in", freq->in, "input corpus")->required();
    cmd->add_option("--kind", freq->kind, "word | letter | first-word")->required();
    cmd->add_option("--out", freq->out, "profile CSV")->required();
    cmd->add_option("--label", freq->label, "restrict to one label (default: all labels)");
    cmd->callback([freq] {
      auto corpus = idiolect::load_jsonl(freq->in);
      auto kind = idiolect::profile_kind_from_string(freq->kind);
      std::vector<std::string> labels;
      if (freq->label.empty())
        labels.assign(corpus.labels().begin(), corpus.labels().end());
      else
        labels.push_back(freq->label);

      auto out = open_out(freq->out);
      out << "label,item,frequency\n";
      for (const auto& label : labels) {
        auto profile = idiolect::frequency_profile(corpus, label, kind);
        for (const auto& [item, f] : profile.table)
          out << csv_field(label) << ',' << csv_field(item) << ',' << fmt(f) << '\n';
      }
      write_manifest("freq",
                     {{"in", freq->in},
                      {"out", freq->out},
                      {"kind", freq->kind},
                      {"label", freq->label}},
                     {freq->in}, {freq->out}, freq->out);
    });
  }

  // ---- train ----
  struct TrainOpts {
    std::string corpus, vocab, out = "model.json", ngram = "1,2";
    size_t min_df = 1;
    bool build_vocab = false;
    idiolect::TrainConfig config;
  };
  auto tr = std::make_shared<TrainOpts>();
  {
    auto* cmd = app.add_subcommand("train", "Fit the attribution model");
    cmd->add_option("--corpus", tr->corpus, "training corpus")->required();
    cmd->add_option("--out", tr->out, "model JSON path");
    cmd->add_option("--vocab", tr->vocab,
                    "vocabulary JSON (default: <out>.vocab.json; built when missing)");
    cmd->add_option("--ngram", tr->ngram, "n-gram range lo,hi");
    cmd->add_option("--min-df", tr->min_df, "minimum document frequency");
    cmd->add_flag("--build-vocab", tr->build_vocab, "rebuild the vocabulary even if present");
    cmd->add_option("--lambda", tr->config.l2_lambda, "L2 penalty");
    cmd->add_option("--epochs", tr->config.epochs, "training epochs");
    cmd->add_option("--batch", tr->config.batch_size, "mini-batch size");
    cmd->add_option("--lr", tr->config.learning_rate, "learning rate");
    cmd->add_option("--seed", tr->config.seed, "shuffle seed");
    cmd->callback([tr] {
      auto corpus = idiolect::load_jsonl(tr->corpus);
      std::string vocab_path = tr->vocab.empty() ? tr->out + ".vocab.json" : tr->vocab;
      bool built = false;
      auto vocab = obtain_vocab(vocab_path, corpus, parse_ngram(tr->ngram), tr->min_df,
                                tr->build_vocab, &built);
      auto data = idiolect::make_dataset(corpus, vocab, idiolect::Split::train);
      auto model = idiolect::train(data, vocab, tr->config);
      model.save(tr->out);

      std::vector<std::string> inputs{tr->corpus};
      std::vector<std::string> outputs{tr->out};
      if (built)
        outputs.push_back(vocab_path);
      else
        inputs.push_back(vocab_path);
      write_manifest("train",
                     {{"corpus", tr->corpus},
                      {"vocab", vocab_path},
                      {"out", tr->out},
                      {"ngram", tr->ngram},
                      {"min_df", tr->min_df},
                      {"lambda", tr->config.l2_lambda},
                      {"epochs", tr->config.epochs},
                      {"batch", tr->config.batch_size},
                      {"lr", tr->config.learning_rate},
                      {"seed", tr->config.seed}},
                     inputs, outputs, tr->out);
      std::cout << "classes=" << model.num_classes() << " dim=" << model.dim()
                << " train_docs=" << data.size() << '\n';
    });
  }

  // ---- eval ----
  struct EvalOpts {
    std::string corpus, model, vocab, report;
  };
  auto ev = std::make_shared<EvalOpts>();
  {
    auto* cmd = app.add_subcommand("eval", "Evaluate a model on the validation view");
    cmd->add_option("--corpus", ev->corpus, "corpus with validation documents")->required();
    cmd->add_option("--model", ev->model, "model JSON")->required();
    cmd->add_option("--vocab", ev->vocab, "vocabulary JSON")->required();
    cmd->add_option("--report", ev->report, "confusion matrix CSV")->required();
    cmd->callback([ev] {
      auto corpus = idiolect::load_jsonl(ev->corpus);
      auto vocab = idiolect::Vocabulary::load(ev->vocab);
      auto model = idiolect::AttributorModel::load(ev->model);
      if (model.vocab_ref() != vocab.fingerprint())
        throw ValidationError("vocabulary " + ev->vocab +
                              " does not match the model's vocab_ref");
      auto data = idiolect::make_dataset(corpus, vocab, idiolect::Split::val);
      auto report = idiolect::evaluate(model, data);

      auto out = open_out(ev->report);
      out << "true_label";
      for (const auto& label : model.labels()) out << ',' << csv_field(label);
      out << '\n';
      for (size_t i = 0; i < model.labels().size(); ++i) {
        out << csv_field(model.labels()[i]);
        for (int64_t n : report.confusion[i]) out << ',' << n;
        out << '\n';
      }

      write_manifest("eval",
                     {{"corpus", ev->corpus},
                      {"model", ev->model},
                      {"vocab", ev->vocab},
                      {"report", ev->report}},
                     {ev->corpus, ev->model, ev->vocab}, {ev->report}, ev->report);
      std::cout << "accuracy=" << fmt(report.accuracy) << " n_eval=" << report.n_eval << '\n';
    });
  }

  // ---- phrases ----
  struct PhraseOpts {
    std::string corpus, model, vocab, out;
    size_t top = 10, exclude_common = 20;
  };
  auto ph = std::make_shared<PhraseOpts>();
  {
    auto* cmd = app.add_subcommand("phrases", "Highest-coefficient phrases per label");
    cmd->add_option("--corpus", ph->corpus, "training corpus (for the common-word filter)")
        ->required();
    cmd->add_option("--model", ph->model, "model JSON")->required();
    cmd->add_option("--vocab", ph->vocab, "vocabulary JSON")->required();
    cmd->add_option("--out", ph->out, "phrases CSV")->required();
    cmd->add_option("--top", ph->top, "phrases per label");
    cmd->add_option("--exclude-common", ph->exclude_common,
                    "drop this many most-frequent unigrams first");
    cmd->callback([ph] {
      auto corpus = idiolect::load_jsonl(ph->corpus);
      auto vocab = idiolect::Vocabulary::load(ph->vocab);
      auto model = idiolect::AttributorModel::load(ph->model);
      auto lists =
          idiolect::characteristic_phrases(model, vocab, corpus, ph->top, ph->exclude_common);

      auto out = open_out(ph->out);
      out << "label,rank,phrase,weight\n";
      for (const auto& [label, list] : lists) {
        for (size_t r = 0; r < list.phrases.size(); ++r) {
          auto idx = vocab.find(list.phrases[r]);
          out << csv_field(label) << ',' << (r + 1) << ',' << csv_field(list.phrases[r]) << ','
              << fmt(model.weight_at(
                     static_cast<size_t>(std::lower_bound(model.labels().begin(),
                                                          model.labels().end(), label) -
                                         model.labels().begin()),
                     *idx))
              << '\n';
        }
        if (list.truncated)
          std::cerr << "note: label " << label << " has only " << list.phrases.size()
                    << " phrases after exclusion\n";
      }
      write_manifest("phrases",
                     {{"corpus", ph->corpus},
                      {"model", ph->model},
                      {"vocab", ph->vocab},
                      {"out", ph->out},
                      {"top", ph->top},
                      {"exclude_common", ph->exclude_common}},
                     {ph->corpus, ph->model, ph->vocab}, {ph->out}, ph->out);
    });
  }

  // ---- similarity ----
  struct SimOpts {
    std::vector<std::string> in;
    std::string out, metric = "rouge1", mode = "across";
  };
  auto sim = std::make_shared<SimOpts>();
  {
    auto* cmd = app.add_subcommand("similarity", "Mean pairwise lexical similarity");
    cmd->add_option("--in", sim->in, "corpus file (repeat for across mode)")->required();
    cmd->add_option("--out", sim->out, "result CSV")->required();
    cmd->add_option("--metric", sim->metric, "rouge1 | rougel");
    cmd->add_option("--mode", sim->mode, "across | within");
    cmd->callback([sim] {
      std::vector<idiolect::Corpus> corpora;
      corpora.reserve(sim->in.size());
      for (const auto& path : sim->in) corpora.push_back(idiolect::load_jsonl(path));
      double mean = idiolect::aggregate_pairwise(
          corpora, idiolect::rouge_metric_from_string(sim->metric),
          idiolect::pair_mode_from_string(sim->mode));

      auto out = open_out(sim->out);
      // bertscore needs neural embeddings and stays a placeholder.
      out << "metric,mode,mean_f1,bertscore\n";
      out << sim->metric << ',' << sim->mode << ',' << fmt(mean) << ",unsupported\n";
      write_manifest("similarity",
                     {{"in", sim->in}, {"out", sim->out}, {"metric", sim->metric},
                      {"mode", sim->mode}},
                     sim->in, {sim->out}, sim->out);
      std::cout << "mean_f1=" << fmt(mean) << '\n';
    });
  }

  // ---- loo ----
  struct LooOpts {
    std::vector<std::string> in;
    std::string out, exclude, ngram = "1,2";
    size_t min_df = 1;
    idiolect::TrainConfig config;
  };
  auto loo = std::make_shared<LooOpts>();
  {
    auto* cmd = app.add_subcommand("loo",
                                   "Attribute one model's responses with a classifier "
                                   "trained on all the others");
    cmd->add_option("--in", loo->in, "corpus file (repeatable; labels may be mixed)")
        ->required();
    cmd->add_option("--exclude", loo->exclude, "label to hold out")->required();
    cmd->add_option("--out", loo->out, "distribution CSV")->required();
    cmd->add_option("--ngram", loo->ngram, "n-gram range lo,hi");
    cmd->add_option("--min-df", loo->min_df, "minimum document frequency");
    cmd->add_option("--lambda", loo->config.l2_lambda, "L2 penalty");
    cmd->add_option("--epochs", loo->config.epochs, "training epochs");
    cmd->add_option("--batch", loo->config.batch_size, "mini-batch size");
    cmd->add_option("--lr", loo->config.learning_rate, "learning rate");
    cmd->add_option("--seed", loo->config.seed, "shuffle seed");
    cmd->callback([loo] {
      std::map<std::string, std::vector<idiolect::Document>> by_label;
      for (const auto& path : loo->in) {
        auto corpus = idiolect::load_jsonl(path);
        for (const auto& doc : corpus.documents()) by_label[doc.label].push_back(doc);
      }
      std::map<std::string, idiolect::Corpus> corpora;
      for (auto& [label, docs] : by_label) corpora.emplace(label, std::move(docs));

      idiolect::LooConfig config;
      config.ngram = parse_ngram(loo->ngram);
      config.min_df = loo->min_df;
      config.train = loo->config;
      auto dist = idiolect::leave_one_out(corpora, loo->exclude, config);

      auto out = open_out(loo->out);
      out << "label,fraction\n";
      for (const auto& [label, fraction] : dist.table)
        out << csv_field(label) << ',' << fmt(fraction) << '\n';
      write_manifest("loo",
                     {{"in", loo->in},
                      {"out", loo->out},
                      {"exclude", loo->exclude},
                      {"ngram", loo->ngram},
                      {"min_df", loo->min_df},
                      {"lambda", loo->config.l2_lambda},
                      {"epochs", loo->config.epochs},
                      {"batch", loo->config.batch_size},
                      {"lr", loo->config.learning_rate},
                      {"seed", loo->config.seed}},
                     loo->in, {loo->out}, loo->out);
    });
  }

  // Endpoint flags shared by the three network verbs.
  struct NetOpts {
    std::string base_url, model, api_key_env;
    double temperature = 0.6;
    std::vector<std::string> params;
    size_t concurrency = 4;
    int max_attempts = 4;
    double base_delay = 0.5;
  };
  auto add_net_options = [](CLI::App* cmd, const std::shared_ptr<NetOpts>& net) {
    cmd->add_option("--base-url", net->base_url, "OpenAI-compatible endpoint base URL")
        ->required();
    cmd->add_option("--model", net->model, "model name at the endpoint")->required();
    cmd->add_option("--api-key-env", net->api_key_env,
                    "environment variable holding the API key");
    cmd->add_option("--temperature", net->temperature, "sampling temperature");
    cmd->add_option("--param", net->params, "extra body parameter name=value (repeatable)");
    cmd->add_option("--concurrency", net->concurrency, "max in-flight requests");
    cmd->add_option("--max-attempts", net->max_attempts, "attempts per request");
    cmd->add_option("--retry-delay", net->base_delay, "base retry delay in seconds");
  };
  auto make_client = [](const NetOpts& net) {
    idiolect::RetryPolicy retry;
    retry.max_attempts = net.max_attempts;
    retry.base_delay_s = net.base_delay;
    return idiolect::ChatClient(
        endpoint_from(net.base_url, net.model, net.api_key_env, net.temperature, net.params),
        std::make_shared<idiolect::HttplibTransport>(), retry);
  };

  // ---- generate ----
  struct GenOpts {
    std::string prompts, out, intervention = "none";
    bool resume = false;
  };
  auto gen = std::make_shared<GenOpts>();
  auto gen_net = std::make_shared<NetOpts>();
  {
    auto* cmd = app.add_subcommand("generate", "Collect model responses for a prompt list");
    cmd->add_option("--prompts", gen->prompts, "prompt file (text lines or JSONL)")->required();
    cmd->add_option("--out", gen->out, "output corpus (JSONL, written incrementally)")
        ->required();
    cmd->add_option("--intervention", gen->intervention, "none | length | format");
    cmd->add_flag("--resume", gen->resume, "skip prompts already present in --out");
    add_net_options(cmd, gen_net);
    cmd->callback([gen, gen_net, make_client] {
      auto prompts = load_prompts(gen->prompts);
      for (size_t i = 0; i < prompts.size(); ++i)
        if (prompts[i].id.empty()) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "p%06zu", i + 1);
          prompts[i].id = buf;
        }

      std::set<std::string> done;
      if (gen->resume) {
        std::ifstream probe(gen->out);
        if (probe) {
          probe.close();
          const auto existing = idiolect::load_jsonl(gen->out);
          for (const auto& doc : existing.documents()) done.insert(doc.id);
        }
      }
      std::vector<idiolect::PromptRecord> pending;
      for (auto& p : prompts)
        if (!done.contains(p.id)) pending.push_back(std::move(p));

      if (!pending.empty()) {
        auto client = make_client(*gen_net);
        idiolect::GenerateOptions options;
        options.intervention = idiolect::intervention_from_string(gen->intervention);
        options.concurrency = gen_net->concurrency;
        std::ofstream out(gen->out, std::ios::binary |
                                        (done.empty() ? std::ios::trunc : std::ios::app));
        if (!out) throw ParseError("cannot write " + gen->out);
        options.on_document = [&out](const idiolect::Document& doc) {
          append_document_jsonl(out, doc);
        };
        idiolect::generate_corpus(pending, client, options);
      }

      json options = endpoint_options(
          endpoint_from(gen_net->base_url, gen_net->model, gen_net->api_key_env,
                        gen_net->temperature, gen_net->params));
      options["prompts"] = gen->prompts;
      options["out"] = gen->out;
      options["intervention"] = gen->intervention;
      options["concurrency"] = gen_net->concurrency;
      options["resume"] = gen->resume;
      write_manifest("generate", options, {gen->prompts}, {gen->out}, gen->out);
      std::cout << "generated=" << pending.size() << " skipped=" << done.size() << '\n';
    });
  }

  // ---- rewrite ----
  struct RewriteOpts {
    std::string in, out, mode;
  };
  auto rw = std::make_shared<RewriteOpts>();
  auto rw_net = std::make_shared<NetOpts>();
  {
    auto* cmd = app.add_subcommand("rewrite", "Rewrite every response through another model");
    cmd->add_option("--in", rw->in, "input corpus")->required();
    cmd->add_option("--out", rw->out, "rewritten corpus path")->required();
    cmd->add_option("--mode", rw->mode, "paraphrase | translate | summarize")->required();
    add_net_options(cmd, rw_net);
    cmd->callback([rw, rw_net, make_client] {
      auto corpus = idiolect::load_jsonl(rw->in);
      auto client = make_client(*rw_net);
      auto rewritten = idiolect::rewrite_corpus(
          corpus, idiolect::rewrite_mode_from_string(rw->mode), client, rw_net->concurrency);
      idiolect::save_jsonl(rewritten, rw->out);

      json options = endpoint_options(client.config());
      options["in"] = rw->in;
      options["out"] = rw->out;
      options["mode"] = rw->mode;
      options["concurrency"] = rw_net->concurrency;
      write_manifest("rewrite", options, {rw->in}, {rw->out}, rw->out);
    });
  }

  // ---- judge ----
  struct JudgeOpts {
    std::string in_a, in_b, out, analysis_template, summary_template;
    size_t pairs = 35, bullets = 5;
    uint64_t seed = idiolect::k_default_seed;
  };
  auto jg = std::make_shared<JudgeOpts>();
  auto jg_net = std::make_shared<NetOpts>();
  {
    auto* cmd = app.add_subcommand("judge",
                                   "Pairwise anonymized comparison with a bullet summary");
    cmd->add_option("--in-a", jg->in_a, "first corpus (prompt-aligned with --in-b)")
        ->required();
    cmd->add_option("--in-b", jg->in_b, "second corpus")->required();
    cmd->add_option("--out", jg->out, "summary JSON path")->required();
    cmd->add_option("--pairs", jg->pairs, "response pairs to analyze");
    cmd->add_option("--bullets", jg->bullets, "bullet points per model");
    cmd->add_option("--seed", jg->seed, "presentation-order seed");
    cmd->add_option("--analysis-template", jg->analysis_template,
                    "file overriding the pair-analysis prompt");
    cmd->add_option("--summary-template", jg->summary_template,
                    "file overriding the summary prompt");
    add_net_options(cmd, jg_net);
    cmd->callback([jg, jg_net, make_client] {
      auto corpus_a = idiolect::load_jsonl(jg->in_a);
      auto corpus_b = idiolect::load_jsonl(jg->in_b);

      idiolect::JudgeRun run;
      run.pair_count = jg->pairs;
      run.bullet_count = jg->bullets;
      run.seed = jg->seed;
      if (!jg->analysis_template.empty())
        run.analysis_prompt = read_text_file(jg->analysis_template);
      if (!jg->summary_template.empty())
        run.summary_prompt = read_text_file(jg->summary_template);

      auto tuples = idiolect::align_by_prompt({corpus_a, corpus_b});
      std::vector<std::pair<const idiolect::Document*, const idiolect::Document*>> usable;
      for (const auto& tuple : tuples)
        if (!tuple[0].response.empty() && !tuple[1].response.empty())
          usable.emplace_back(&tuple[0], &tuple[1]);
      if (usable.size() < run.pair_count)
        throw ValidationError("need " + std::to_string(run.pair_count) +
                              " aligned non-empty response pairs, found " +
                              std::to_string(usable.size()));

      auto client = make_client(*jg_net);
      std::vector<idiolect::JudgeAnalysis> analyses;
      analyses.reserve(run.pair_count);
      for (size_t i = 0; i < run.pair_count; ++i)
        analyses.push_back(idiolect::judge_pair(usable[i].first->response,
                                                usable[i].second->response, run, i, client));
      auto summary = idiolect::judge_summarize(analyses, run, client);

      json result;
      result["corpus_a"] = jg->in_a;
      result["corpus_b"] = jg->in_b;
      result["label_a"] = corpus_a.labels().size() == 1 ? corpus_a.labels()[0] : "";
      result["label_b"] = corpus_b.labels().size() == 1 ? corpus_b.labels()[0] : "";
      // Model 1 in the summary is always corpus A, Model 2 corpus B.
      result["bullets_a"] = summary.model1_bullets;
      result["bullets_b"] = summary.model2_bullets;
      result["parse_warning"] = summary.parse_warning;
      result["raw_summary"] = summary.raw;
      auto& alist = result["analyses"] = json::array();
      for (size_t i = 0; i < analyses.size(); ++i)
        alist.push_back({{"pair", i},
                         {"id_a", usable[i].first->id},
                         {"id_b", usable[i].second->id},
                         {"first_is_a", analyses[i].first_is_a},
                         {"text", analyses[i].text}});
      auto out = open_out(jg->out);
      out << result.dump(2) << '\n';

      json options = endpoint_options(client.config());
      options["in_a"] = jg->in_a;
      options["in_b"] = jg->in_b;
      options["out"] = jg->out;
      options["pairs"] = jg->pairs;
      options["bullets"] = jg->bullets;
      options["seed"] = jg->seed;
      options["analysis_template"] = jg->analysis_template;
      options["summary_template"] = jg->summary_template;
      std::vector<std::string> inputs{jg->in_a, jg->in_b};
      if (!jg->analysis_template.empty()) inputs.push_back(jg->analysis_template);
      if (!jg->summary_template.empty()) inputs.push_back(jg->summary_template);
      write_manifest("judge", options, inputs, {jg->out}, jg->out);
      if (summary.parse_warning)
        std::cerr << "note: summary reply did not parse into per-model bullets; see "
                     "raw_summary\n";
    });
  }

  if (argc >= 2 && argv[1][0] != '-') {
    bool known = false;
    for (const CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
      if (sub->get_name() == argv[1]) known = true;
    if (!known) {
      std::cerr << "usage error: unknown command \"" << argv[1] << "\"\n";
      return 1;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::RequiredError& e) {
    auto subs = app.get_subcommands();
    if (!subs.empty()) {
      std::string msg = "usage error: missing required option(s):";
      bool any = false;
      for (const CLI::Option* opt : subs.back()->get_options())
        if (opt->get_required() && opt->count() == 0) {
          msg += ' ' + opt->get_name();
          any = true;
        }
      if (any) {
        std::cerr << msg << '\n';
        return 1;
      }
    }
    app.exit(e);
    return 1;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const TransportError& e) {
    std::cerr << "transport error: " << e.what() << '\n';
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
