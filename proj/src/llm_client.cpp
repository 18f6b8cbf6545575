#include "idiolect/llm_client.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "idiolect/errors.hpp"

namespace idiolect {

using nlohmann::json;

HttpResponse HttplibTransport::send(const HttpRequest& request) {
  // Split the URL into origin and path; httplib clients bind to an origin.
  auto scheme_end = request.url.find("://");
  if (scheme_end == std::string::npos)
    throw TransportError("URL without scheme: " + request.url);
  auto path_begin = request.url.find('/', scheme_end + 3);
  std::string origin =
      path_begin == std::string::npos ? request.url : request.url.substr(0, path_begin);
  std::string path = path_begin == std::string::npos ? "/" : request.url.substr(path_begin);

  httplib::Client client(origin);
  client.set_connection_timeout(std::chrono::duration<double>(timeout_s_));
  client.set_read_timeout(std::chrono::duration<double>(timeout_s_));
  client.set_write_timeout(std::chrono::duration<double>(timeout_s_));

  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [name, value] : request.headers) {
    if (name == "Content-Type")
      content_type = value;
    else
      headers.emplace(name, value);
  }

  auto result = client.Post(path, headers, request.body, content_type);
  if (!result)
    throw TransportError("request to " + origin + path +
                         " failed: " + httplib::to_string(result.error()));
  return {result->status, result->body};
}

HttpResponse MockTransport::send(const HttpRequest& request) {
  std::lock_guard lock(mu_);
  requests_.push_back(request);
  if (handler_) return handler_(request);
  if (script_.empty()) throw TransportError("mock transport has no scripted responses");
  const HttpResponse& response = script_[std::min(cursor_, script_.size() - 1)];
  ++cursor_;
  return response;
}

HttpResponse ok_completion(std::string_view text) {
  json body{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}};
  return {200, body.dump()};
}

void EndpointConfig::validate() const {
  if (base_url.empty()) throw ValidationError("endpoint base_url must be non-empty");
  if (model_name.empty()) throw ValidationError("endpoint model_name must be non-empty");
  if (temperature < 0.0) throw ValidationError("temperature must be >= 0");
}

ChatClient::ChatClient(EndpointConfig config, std::shared_ptr<Transport> transport,
                       RetryPolicy retry)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      retry_(retry),
      jitter_(retry.jitter_seed) {
  config_.validate();
  if (!transport_) throw ValidationError("chat client needs a transport");
  if (retry_.max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
}

std::string ChatClient::request_body(const std::vector<ChatMessage>& messages) const {
  json body;
  body["model"] = config_.model_name;
  auto& list = body["messages"] = json::array();
  for (const auto& m : messages) list.push_back({{"role", m.role}, {"content", m.content}});
  body["temperature"] = config_.temperature;
  for (const auto& [key, value] : config_.extra_params) body[key] = value;
  return body.dump();
}

namespace {

std::string body_excerpt(const std::string& body) {
  constexpr size_t k_max = 200;
  if (body.size() <= k_max) return body;
  return body.substr(0, k_max) + "...";
}

std::string extract_completion_text(const std::string& body) {
  json reply;
  try {
    reply = json::parse(body);
  } catch (const json::exception& e) {
    throw ParseError(std::string("completion reply is not JSON: ") + e.what());
  }
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw ParseError("completion reply lacks choices[0].message.content: " +
                     body_excerpt(body));
  }
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

}  // namespace

std::string ChatClient::complete(const std::vector<ChatMessage>& messages) {
  HttpRequest request;
  std::string base = config_.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  request.url = base + "/chat/completions";
  request.body = request_body(messages);
  request.headers["Content-Type"] = "application/json";
  if (!config_.api_key_env.empty()) {
    // Read at send time only; the key never lands in any persisted artifact.
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key)
      throw ValidationError("environment variable " + config_.api_key_env + " is not set");
    request.headers["Authorization"] = std::string("Bearer ") + key;
  }

  std::string last_error;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    HttpResponse response;
    bool transport_failed = false;
    try {
      response = transport_->send(request);
    } catch (const TransportError& e) {
      transport_failed = true;
      last_error = e.what();
    }
    if (!transport_failed) {
      if (response.status == 200) return extract_completion_text(response.body);
      std::string error =
          "HTTP " + std::to_string(response.status) + ": " + body_excerpt(response.body);
      if (!retryable_status(response.status)) throw TransportError(error);
      last_error = std::move(error);
    }

    if (attempt == retry_.max_attempts) break;
    if (retry_.base_delay_s > 0.0) {
      double delay = std::min(retry_.max_delay_s,
                              retry_.base_delay_s * std::pow(2.0, attempt - 1));
      double jitter;
      {
        std::lock_guard lock(jitter_mu_);
        jitter = jitter_.unit();
      }
      std::this_thread::sleep_for(std::chrono::duration<double>(delay * (0.5 + 0.5 * jitter)));
    }
  }
  throw TransportError("request failed after " + std::to_string(retry_.max_attempts) +
                       " attempts; last error: " + last_error);
}

std::string to_string(Intervention i) {
  switch (i) {
    case Intervention::none: return "none";
    case Intervention::length: return "length";
    case Intervention::format: return "format";
  }
  throw ValidationError("invalid intervention");
}

Intervention intervention_from_string(std::string_view s) {
  if (s == "none") return Intervention::none;
  if (s == "length") return Intervention::length;
  if (s == "format") return Intervention::format;
  throw ValidationError("unknown intervention \"" + std::string(s) + "\"");
}

const std::string k_length_instruction =
    "Please provide a concise response in a single paragraph, limited to a maximum of 100 "
    "words.";
const std::string k_format_instruction =
    "Please provide your response in plain text only, avoiding the use of italicized or bold "
    "text, lists, markdown, or HTML formatting.";

std::string apply_intervention(std::string_view prompt, Intervention intervention) {
  switch (intervention) {
    case Intervention::none: return std::string(prompt);
    case Intervention::length: return std::string(prompt) + " " + k_length_instruction;
    case Intervention::format: return std::string(prompt) + " " + k_format_instruction;
  }
  throw ValidationError("invalid intervention");
}

namespace {

struct SlotResult {
  bool done = false;
  std::string text;
  std::string error;
};

// Runs `work(i)` for i in [0, n) on up to `concurrency` threads and calls
// `emit(i)` in index order as prefixes finish.
void ordered_parallel_for(size_t n, size_t concurrency, const std::function<void(size_t)>& work,
                          const std::function<void(size_t)>& emit,
                          std::vector<SlotResult>& slots) {
  std::atomic<size_t> next{0};
  std::mutex emit_mu;
  size_t emitted = 0;

  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= n) return;
      work(i);
      std::lock_guard lock(emit_mu);
      slots[i].done = true;
      while (emitted < n && slots[emitted].done) {
        emit(emitted);
        ++emitted;
      }
    }
  };

  const size_t threads = std::max<size_t>(1, std::min(concurrency, n));
  if (threads == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

std::string padded_id(size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "p%06zu", index + 1);
  return buf;
}

}  // namespace

Corpus generate_corpus(const std::vector<PromptRecord>& prompts, ChatClient& client,
                       const GenerateOptions& options) {
  if (prompts.empty()) throw ValidationError("generate needs at least one prompt");

  std::vector<std::string> full_prompts(prompts.size());
  for (size_t i = 0; i < prompts.size(); ++i)
    full_prompts[i] = apply_intervention(prompts[i].text, options.intervention);

  std::vector<SlotResult> slots(prompts.size());
  auto build_document = [&](size_t i) {
    Document doc;
    doc.id = prompts[i].id.empty() ? padded_id(i) : prompts[i].id;
    doc.prompt = full_prompts[i];
    doc.response = slots[i].text;
    doc.label = client.config().model_name;
    if (!slots[i].error.empty()) doc.meta["generation_error"] = slots[i].error;
    return doc;
  };

  ordered_parallel_for(
      prompts.size(), options.concurrency,
      [&](size_t i) {
        try {
          slots[i].text = client.complete({{"user", full_prompts[i]}});
          if (slots[i].text.empty()) slots[i].error = "empty completion text";
        } catch (const std::exception& e) {
          slots[i].text.clear();
          slots[i].error = e.what();
        }
      },
      [&](size_t i) {
        if (options.on_document) options.on_document(build_document(i));
      },
      slots);

  size_t failures = 0;
  for (const auto& slot : slots)
    if (!slot.error.empty()) ++failures;
  if (failures == prompts.size())
    throw TransportError("all " + std::to_string(prompts.size()) +
                         " prompts failed; first error: " + slots.front().error);

  std::vector<Document> docs;
  docs.reserve(prompts.size());
  for (size_t i = 0; i < prompts.size(); ++i) docs.push_back(build_document(i));
  return Corpus(std::move(docs));
}

std::string to_string(RewriteMode m) {
  switch (m) {
    case RewriteMode::paraphrase: return "paraphrase";
    case RewriteMode::translate: return "translate";
    case RewriteMode::summarize: return "summarize";
  }
  throw ValidationError("invalid rewrite mode");
}

RewriteMode rewrite_mode_from_string(std::string_view s) {
  if (s == "paraphrase") return RewriteMode::paraphrase;
  if (s == "translate") return RewriteMode::translate;
  if (s == "summarize") return RewriteMode::summarize;
  throw ValidationError("unknown rewrite mode \"" + std::string(s) + "\"");
}

const std::string& rewrite_instruction(RewriteMode mode) {
  static const std::string paraphrase =
      "Paraphrase the above text while maintaining the semantic meaning of the original text.";
  static const std::string translate = "Translate the above text into Chinese.";
  static const std::string summarize = "Summarize the above text in one paragraph.";
  switch (mode) {
    case RewriteMode::paraphrase: return paraphrase;
    case RewriteMode::translate: return translate;
    case RewriteMode::summarize: return summarize;
  }
  throw ValidationError("invalid rewrite mode");
}

std::string rewrite(std::string_view text, RewriteMode mode, ChatClient& client) {
  const std::string message = std::string(text) + "\n\n" + rewrite_instruction(mode);
  return client.complete({{"user", message}});
}

Corpus rewrite_corpus(const Corpus& corpus, RewriteMode mode, ChatClient& client,
                      size_t concurrency) {
  const auto& docs = corpus.documents();
  std::vector<SlotResult> slots(docs.size());
  ordered_parallel_for(
      docs.size(), concurrency,
      [&](size_t i) {
        if (docs[i].response.empty()) return;  // nothing to rewrite, kept as-is
        try {
          slots[i].text = rewrite(docs[i].response, mode, client);
          if (slots[i].text.empty()) slots[i].error = "empty completion text";
        } catch (const std::exception& e) {
          slots[i].error = e.what();
        }
      },
      [](size_t) {}, slots);

  std::vector<Document> out;
  out.reserve(docs.size());
  for (size_t i = 0; i < docs.size(); ++i) {
    Document doc = docs[i];
    if (!docs[i].response.empty()) {
      doc.response = slots[i].error.empty() ? slots[i].text : "";
      doc.meta["rewrite_mode"] = to_string(mode);
      if (!slots[i].error.empty()) doc.meta["generation_error"] = slots[i].error;
    }
    out.push_back(std::move(doc));
  }
  return Corpus(std::move(out));
}

const std::string k_default_analysis_prompt =
    "You are comparing two anonymized AI assistant responses to the same prompt.\n"
    "\n"
    "Response 1:\n"
    "{response_1}\n"
    "\n"
    "Response 2:\n"
    "{response_2}\n"
    "\n"
    "Analyze how Response 1 and Response 2 differ in word choice, tone, formatting, and "
    "structure. Describe the distinctive writing characteristics of each response without "
    "judging which is better.";

const std::string k_default_summary_prompt =
    "Below are analyses comparing response pairs written by two AI models. Each analysis "
    "header states which model wrote Response 1 and which wrote Response 2.\n"
    "\n"
    "{analyses}\n"
    "\n"
    "Distill these analyses into {bullet_count} bullet points that characterize the "
    "idiosyncrasies of Model 1, then {bullet_count} bullet points for Model 2. Format the "
    "answer exactly as:\n"
    "Model 1:\n"
    "- ...\n"
    "Model 2:\n"
    "- ...";

namespace {

void replace_all(std::string& text, std::string_view slot, std::string_view value) {
  size_t pos = 0;
  while ((pos = text.find(slot, pos)) != std::string::npos) {
    text.replace(pos, slot.size(), value);
    pos += value.size();
  }
}

void require_slot(const std::string& tmpl, std::string_view slot, const char* which) {
  if (tmpl.find(slot) == std::string::npos)
    throw ValidationError(std::string(which) + " template is missing the " + std::string(slot) +
                          " slot");
}

}  // namespace

std::string judge_pair_prompt(std::string_view response_a, std::string_view response_b,
                              const JudgeRun& run, uint64_t pair_seed, bool* first_is_a_out) {
  if (response_a.empty() || response_b.empty())
    throw ValidationError("judge responses must be non-empty");

  std::string tmpl = run.analysis_prompt.empty() ? k_default_analysis_prompt : run.analysis_prompt;
  require_slot(tmpl, "{response_1}", "analysis");
  require_slot(tmpl, "{response_2}", "analysis");

  const bool first_is_a = Rng(mix_seeds(run.seed, pair_seed)).coin();
  if (first_is_a_out) *first_is_a_out = first_is_a;

  replace_all(tmpl, "{response_1}", first_is_a ? response_a : response_b);
  replace_all(tmpl, "{response_2}", first_is_a ? response_b : response_a);
  return tmpl;
}

JudgeAnalysis judge_pair(std::string_view response_a, std::string_view response_b,
                         const JudgeRun& run, uint64_t pair_seed, ChatClient& client) {
  JudgeAnalysis analysis;
  std::string prompt =
      judge_pair_prompt(response_a, response_b, run, pair_seed, &analysis.first_is_a);
  analysis.text = client.complete({{"user", prompt}});
  return analysis;
}

std::string judge_summary_prompt(const std::vector<JudgeAnalysis>& analyses,
                                 const JudgeRun& run) {
  if (analyses.empty()) throw ValidationError("judge summary needs at least one analysis");

  std::string tmpl = run.summary_prompt.empty() ? k_default_summary_prompt : run.summary_prompt;
  require_slot(tmpl, "{analyses}", "summary");
  require_slot(tmpl, "{bullet_count}", "summary");

  std::string block;
  for (size_t i = 0; i < analyses.size(); ++i) {
    if (i > 0) block += "\n\n";
    block += "Analysis " + std::to_string(i + 1) + " (Response 1 = Model " +
             (analyses[i].first_is_a ? "1" : "2") + ", Response 2 = Model " +
             (analyses[i].first_is_a ? "2" : "1") + "):\n";
    block += analyses[i].text;
  }

  replace_all(tmpl, "{analyses}", block);
  replace_all(tmpl, "{bullet_count}", std::to_string(run.bullet_count));
  return tmpl;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// "- text", "* text", or "1. text" -> "text"; empty view otherwise.
std::string_view bullet_text(std::string_view line) {
  if (line.size() >= 2 && (line[0] == '-' || line[0] == '*') && line[1] == ' ')
    return trim(line.substr(2));
  size_t d = 0;
  while (d < line.size() && std::isdigit(static_cast<unsigned char>(line[d]))) ++d;
  if (d > 0 && d + 1 < line.size() && line[d] == '.' && line[d + 1] == ' ')
    return trim(line.substr(d + 2));
  return {};
}

bool mentions_model(std::string_view line, std::string_view name) {
  return line.find(name) != std::string_view::npos;
}

}  // namespace

JudgeSummary judge_summarize(const std::vector<JudgeAnalysis>& analyses, const JudgeRun& run,
                             ChatClient& client) {
  std::string prompt = judge_summary_prompt(analyses, run);
  JudgeSummary summary;
  summary.raw = client.complete({{"user", prompt}});

  std::vector<std::string>* current = nullptr;
  size_t pos = 0;
  const std::string& raw = summary.raw;
  while (pos <= raw.size()) {
    size_t eol = raw.find('\n', pos);
    std::string_view line(raw.data() + pos,
                          (eol == std::string::npos ? raw.size() : eol) - pos);
    line = trim(line);

    auto bullet = bullet_text(line);
    if (!bullet.empty() && current) {
      current->emplace_back(bullet);
    } else if (bullet.empty() && !line.empty()) {
      if (mentions_model(line, "Model 1"))
        current = &summary.model1_bullets;
      else if (mentions_model(line, "Model 2"))
        current = &summary.model2_bullets;
    }

    if (eol == std::string::npos) break;
    pos = eol + 1;
  }

  summary.parse_warning = summary.model1_bullets.empty() || summary.model2_bullets.empty();
  return summary;
}

}  // namespace idiolect
