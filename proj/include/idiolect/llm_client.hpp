#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "idiolect/corpus.hpp"
#include "idiolect/rng.hpp"

namespace idiolect {

struct HttpRequest {
  std::string url;
  std::string body;  // JSON; never contains credentials
  std::map<std::string, std::string> headers;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Transport seam: the HTTP implementation for production, a scripted fake
// for tests. send() throws TransportError when no HTTP response exists.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

class HttplibTransport final : public Transport {
 public:
  explicit HttplibTransport(double timeout_s = 120.0) : timeout_s_(timeout_s) {}
  HttpResponse send(const HttpRequest& request) override;

 private:
  double timeout_s_;
};

// Replays a scripted response sequence and records every outbound request.
// The last response repeats once the script is exhausted.
class MockTransport final : public Transport {
 public:
  MockTransport() = default;
  explicit MockTransport(std::vector<HttpResponse> script) : script_(std::move(script)) {}
  explicit MockTransport(std::function<HttpResponse(const HttpRequest&)> handler)
      : handler_(std::move(handler)) {}

  HttpResponse send(const HttpRequest& request) override;

  const std::vector<HttpRequest>& requests() const { return requests_; }

 private:
  std::mutex mu_;
  std::vector<HttpResponse> script_;
  size_t cursor_ = 0;
  std::function<HttpResponse(const HttpRequest&)> handler_;
  std::vector<HttpRequest> requests_;
};

// Canned reply helpers for tests.
HttpResponse ok_completion(std::string_view text);

// Any OpenAI-compatible chat completions endpoint. api_key_env names an
// environment variable; the key itself is read at send time and never
// stored, logged, or persisted.
struct EndpointConfig {
  std::string base_url;
  std::string api_key_env;
  std::string model_name;
  double temperature = 0.6;
  std::map<std::string, double> extra_params;  // e.g. {"repetition_penalty": 1.1}

  void validate() const;
};

struct RetryPolicy {
  int max_attempts = 4;
  double base_delay_s = 0.5;
  double max_delay_s = 8.0;
  uint64_t jitter_seed = k_default_seed;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

class ChatClient {
 public:
  ChatClient(EndpointConfig config, std::shared_ptr<Transport> transport,
             RetryPolicy retry = {});

  // Assistant text of the first choice. Retries rate limits (429), server
  // errors (5xx), and transport failures with exponential backoff; other
  // statuses fail immediately with the status and a body excerpt.
  std::string complete(const std::vector<ChatMessage>& messages);

  // Outbound POST body for a message list, byte-stable for fixed inputs.
  std::string request_body(const std::vector<ChatMessage>& messages) const;

  const EndpointConfig& config() const { return config_; }

 private:
  EndpointConfig config_;
  std::shared_ptr<Transport> transport_;
  RetryPolicy retry_;
  std::mutex jitter_mu_;
  Rng jitter_;
};

enum class Intervention { none, length, format };

std::string to_string(Intervention i);
Intervention intervention_from_string(std::string_view s);

// The exact prompt-level intervention instructions.
extern const std::string k_length_instruction;
extern const std::string k_format_instruction;

// `prompt` plus the intervention instruction (unchanged for none).
std::string apply_intervention(std::string_view prompt, Intervention intervention);

struct PromptRecord {
  std::string id;  // auto-assigned when empty
  std::string text;
};

struct GenerateOptions {
  Intervention intervention = Intervention::none;
  size_t concurrency = 4;
  // Called with each finished document in prompt order (for incremental
  // persistence).
  std::function<void(const Document&)> on_document;
};

// One document per prompt, in prompt order, labeled with the configured
// model name. Per-prompt transport failures are recorded in
// meta["generation_error"] with an empty response; only an all-prompt
// failure throws.
Corpus generate_corpus(const std::vector<PromptRecord>& prompts, ChatClient& client,
                       const GenerateOptions& options = {});

enum class RewriteMode { paraphrase, translate, summarize };

std::string to_string(RewriteMode m);
RewriteMode rewrite_mode_from_string(std::string_view s);

// The exact rewrite instruction for a mode.
const std::string& rewrite_instruction(RewriteMode mode);

// Sends the source text followed by the mode's instruction in one user
// message and returns the rewritten text.
std::string rewrite(std::string_view text, RewriteMode mode, ChatClient& client);

// Rewrites every response of the corpus, preserving ids, labels, and splits;
// meta gains "rewrite_mode".
Corpus rewrite_corpus(const Corpus& corpus, RewriteMode mode, ChatClient& client,
                      size_t concurrency = 4);

// Pairwise judge protocol: anonymized responses, seeded presentation order,
// one analysis per pair, then a single summarization call.
struct JudgeRun {
  size_t pair_count = 35;
  std::string analysis_prompt;  // defaulted to k_default_analysis_prompt when empty
  std::string summary_prompt;   // defaulted to k_default_summary_prompt when empty
  uint64_t seed = k_default_seed;
  size_t bullet_count = 5;
};

// Editable defaults. The analysis template must contain {response_1} and
// {response_2}; the summary template {analyses} and {bullet_count}.
extern const std::string k_default_analysis_prompt;
extern const std::string k_default_summary_prompt;

struct JudgeAnalysis {
  std::string text;
  bool first_is_a = true;  // whether "Response 1" was response_a
};

// Outbound prompt for one pair; model identities never appear, and the
// presentation order of the two responses is a seeded coin flip on
// (run.seed, pair_seed).
std::string judge_pair_prompt(std::string_view response_a, std::string_view response_b,
                              const JudgeRun& run, uint64_t pair_seed, bool* first_is_a_out);

JudgeAnalysis judge_pair(std::string_view response_a, std::string_view response_b,
                         const JudgeRun& run, uint64_t pair_seed, ChatClient& client);

struct JudgeSummary {
  std::vector<std::string> model1_bullets;
  std::vector<std::string> model2_bullets;
  std::string raw;
  bool parse_warning = false;  // reply did not parse into per-model bullets
};

// Single summarization call embedding every analysis, normalized so
// "Model 1" is always the first corpus and "Model 2" the second.
std::string judge_summary_prompt(const std::vector<JudgeAnalysis>& analyses,
                                 const JudgeRun& run);

JudgeSummary judge_summarize(const std::vector<JudgeAnalysis>& analyses, const JudgeRun& run,
                             ChatClient& client);

}  // namespace idiolect
