#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ecorag/text.hpp"

namespace ecorag {

struct OracleRequest {
  std::string question;
  std::optional<std::string> context;  // absent = closed-book
  std::string template_id = "qa-fewshot-v1";
};

struct AnswerAttempt {
  std::string raw_text;  // verbatim, never normalized here
  std::chrono::milliseconds latency{0};
  enum class Source { Scripted, Http, Cache } source = Source::Scripted;
};

// Prompt templates use {question} and {documents} placeholders. A closed-book
// request drops the whole line holding {documents}.
class TemplateRegistry {
 public:
  static const TemplateRegistry& builtins();

  void add(const std::string& id, const std::string& text);
  bool has(const std::string& id) const;
  std::string render(const std::string& id, const std::string& question,
                     const std::optional<std::string>& context) const;

 private:
  std::map<std::string, std::string> templates_;
};

std::string render_prompt(const std::string& template_id, const std::string& question,
                          const std::optional<std::string>& context);

class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual AnswerAttempt generate(const OracleRequest& request) = 0;
};

// --- scripted oracle -------------------------------------------------------

// One rule of a scripted answer table, matched against the rendered context.
// All `contains_all` substrings must be present. If `evidence` is set, it
// must occur, and no `decoys` entry may occur before its first occurrence.
struct ContextRule {
  std::vector<std::string> contains_all;
  std::optional<std::string> evidence;
  std::vector<std::string> decoys;
  std::string answer;

  bool matches(const std::string& context) const;
};

struct ScriptedEntry {
  std::string closed_book_answer;
  std::vector<ContextRule> rules;  // first match wins
  std::string default_answer;
};

class ScriptedOracle final : public Oracle {
 public:
  explicit ScriptedOracle(std::string global_default = "unknown")
      : global_default_(std::move(global_default)) {}

  void add_question(const std::string& question, ScriptedEntry entry);
  AnswerAttempt generate(const OracleRequest& request) override;

  static ScriptedOracle from_json_file(const std::string& path);
  std::string to_json() const;

 private:
  std::map<std::string, ScriptedEntry> by_question_;
  std::string global_default_;
};

// --- HTTP oracle -----------------------------------------------------------

struct HttpResponse {
  int status = 0;
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& path, const std::string& body,
                            const std::vector<std::pair<std::string, std::string>>& headers) = 0;
};

// cpp-httplib transport; one client per call keeps it safe under concurrency.
std::unique_ptr<HttpTransport> make_httplib_transport(const std::string& base_url,
                                                      int timeout_ms);

struct HttpOracleConfig {
  std::string base_url;
  std::string model;
  int timeout_ms = 30000;
  int retries = 3;
  int backoff_ms = 500;  // doubles per attempt
  int in_flight_limit = 4;
  std::string api_key;  // from ECORAG_API_KEY
};

class HttpOracle final : public Oracle {
 public:
  HttpOracle(std::unique_ptr<HttpTransport> transport, HttpOracleConfig cfg);

  AnswerAttempt generate(const OracleRequest& request) override;

  // Test seams: wall clock in milliseconds and a sleep hook for backoff.
  std::function<std::int64_t()> now_ms;
  std::function<void(int)> sleep_ms;

 private:
  std::unique_ptr<HttpTransport> transport_;
  HttpOracleConfig cfg_;
  std::mutex slots_mu_;
  std::condition_variable slots_cv_;
  int in_flight_ = 0;
};

// --- caching ---------------------------------------------------------------

// Append-only JSON-lines response log keyed by a content hash of the request.
// Reads are concurrent; writes are serialized. A warm cache answers without
// touching the wrapped oracle at all.
class CachingOracle final : public Oracle {
 public:
  CachingOracle(Oracle& inner, std::string path);

  AnswerAttempt generate(const OracleRequest& request) override;

  std::size_t hits() const { return hits_.load(); }
  std::size_t forwarded() const { return forwarded_.load(); }

  static std::string request_key(const OracleRequest& request);

 private:
  Oracle& inner_;
  std::string path_;
  std::unordered_map<std::string, std::string> answers_;
  mutable std::shared_mutex mu_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> forwarded_{0};
};

// --- correctness -----------------------------------------------------------

enum class MatchMode { Containment, Exact };

// Containment: some gold alias appears in the prediction as a contiguous
// whole-token phrase after normalization. Exact: normalized equality.
bool is_correct(const AnswerAttempt& attempt, std::span<const std::string> gold_answers,
                MatchMode mode = MatchMode::Containment);

}  // namespace ecorag
