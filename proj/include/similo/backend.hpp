#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "similo/prompt.hpp"
#include "similo/scoring.hpp"

namespace similo {

// Request budget for one backend instance. Defaults are the GPT-4 quota:
// 8K-token prompts, 200 requests and 40000 tokens per minute.
struct BackendPolicy {
  int max_requests_per_minute = 200;
  int max_tokens_per_minute = 40000;
  int max_prompt_tokens = kDefaultMaxPromptTokens;
  int max_attempts = 3;
  double backoff_base_seconds = 1.0;
};

void validate(const BackendPolicy& policy);

using Instant = std::chrono::steady_clock::time_point;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Instant now() = 0;
  virtual void sleep_until(Instant t) = 0;
};

class SystemClock final : public Clock {
 public:
  Instant now() override { return std::chrono::steady_clock::now(); }
  void sleep_until(Instant t) override;
};

// Time only moves when someone sleeps or calls advance().
class SimulatedClock final : public Clock {
 public:
  Instant now() override;
  void sleep_until(Instant t) override;
  void advance(std::chrono::nanoseconds d);

 private:
  std::mutex mutex_;
  Instant now_{};
};

// Sliding-window budget: within any 60-second window at most
// `requests_per_minute` dispatches and `tokens_per_minute` tokens.
// Thread-safe; one instance is shared by all senders of a backend.
class RateLimiter {
 public:
  struct Dispatch {
    Instant at;
    int tokens;
  };

  RateLimiter(int requests_per_minute, int tokens_per_minute, Clock& clock);

  // Blocks (through the clock) until the request fits, then records it.
  // Throws Error(kRateLimited) when `tokens` alone exceeds the budget.
  Instant acquire(int tokens);

  std::vector<Dispatch> history() const;

 private:
  int rpm_;
  int tpm_;
  Clock& clock_;
  mutable std::mutex mutex_;
  std::deque<Dispatch> window_;
  long long window_tokens_ = 0;
  std::vector<Dispatch> history_;
};

// What the pipeline knows about a call. Live and replay backends only look
// at the bundle; scripted backends may use the rest.
struct CallContext {
  std::span<const ScoredCandidate> candidates;
  std::string_view oracle_xpath;
  PromptTemplate kind = PromptTemplate::kIdOnly;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const PromptBundle& bundle, const CallContext& context) = 0;
  virtual std::string describe() const = 0;
};

struct SendResult {
  std::string raw;
  double latency_ms = 0.0;
};

// Calls the backend and measures wall-clock latency around it.
SendResult send(const PromptBundle& bundle, Backend& backend, const CallContext& context = {});

// ---------------------------------------------------------------------------
// Live chat-completions backend.

struct HttpResponse {
  int status = 0;  // 0: no response (connection failure)
  std::string body;
  std::string error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url, const std::map<std::string, std::string>& headers,
                            const std::string& body) = 0;
};

// cpp-httplib backed transport; handles http:// and https:// URLs.
std::unique_ptr<HttpTransport> make_http_transport(std::chrono::seconds timeout = std::chrono::seconds(120));

inline constexpr std::string_view kApiKeyEnvVar = "SIMILO_LLM_API_KEY";
inline constexpr std::string_view kDefaultEndpoint = "https://api.openai.com/v1/chat/completions";
inline constexpr std::string_view kDefaultModel = "gpt-4";

struct LiveOptions {
  std::string endpoint{kDefaultEndpoint};
  std::string model{kDefaultModel};
  std::string api_key;
  double temperature = 0.0;
  BackendPolicy policy;
};

// Reads the API key from SIMILO_LLM_API_KEY. Throws Error(kMissingApiKey).
std::string api_key_from_env();

// Request body for one completion: the prompt is the only (user) message.
std::string chat_request_body(const LiveOptions& options, std::string_view prompt);

class LiveBackend final : public Backend {
 public:
  LiveBackend(LiveOptions options, std::unique_ptr<HttpTransport> transport,
              Clock& clock);

  // Retries 429, 5xx and connection failures with exponential backoff.
  // Throws Error(kRateLimited) or Error(kTransportError) once attempts run out.
  std::string complete(const PromptBundle& bundle, const CallContext& context) override;
  std::string describe() const override;

  const RateLimiter& limiter() const { return limiter_; }
  const LiveOptions& options() const { return options_; }

 private:
  LiveOptions options_;
  std::unique_ptr<HttpTransport> transport_;
  Clock& clock_;
  RateLimiter limiter_;
};

// ---------------------------------------------------------------------------
// Transcript store: <dir>/<sha256 of prompt>.request.txt holds the prompt,
// <dir>/<sha256 of prompt>.response.txt the response, both verbatim.

std::string content_hash(std::string_view text);

class TranscriptStore {
 public:
  explicit TranscriptStore(std::filesystem::path dir);

  std::optional<std::string> find(std::string_view prompt) const;
  void save(std::string_view prompt, std::string_view response) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(TranscriptStore store) : store_(std::move(store)) {}
  // Throws Error(kReplayMiss) for prompts that were never recorded.
  std::string complete(const PromptBundle& bundle, const CallContext& context) override;
  std::string describe() const override;

 private:
  TranscriptStore store_;
};

// Wraps another backend and stores every exchange.
class RecordingBackend final : public Backend {
 public:
  RecordingBackend(Backend& inner, TranscriptStore store) : inner_(inner), store_(std::move(store)) {}
  std::string complete(const PromptBundle& bundle, const CallContext& context) override;
  std::string describe() const override;

 private:
  Backend& inner_;
  TranscriptStore store_;
};

// Deterministic responses for tests and offline runs.
class ScriptedBackend final : public Backend {
 public:
  using Chooser = std::function<int(const PromptBundle&, const CallContext&)>;
  using Responder = std::function<std::string(const PromptBundle&, const CallContext&)>;

  // Answers the chosen widget id in the format the template asks for.
  ScriptedBackend(std::string name, Chooser chooser);
  // Answers arbitrary text.
  static ScriptedBackend raw(std::string name, Responder responder);

  std::string complete(const PromptBundle& bundle, const CallContext& context) override;
  std::string describe() const override { return "scripted:" + name_; }

 private:
  ScriptedBackend(std::string name, Responder responder, int);

  std::string name_;
  Responder responder_;
};

// Always the rank-1 candidate.
ScriptedBackend scripted_rank1();
// The candidate holding the oracle xpath, or rank 1 when none does.
ScriptedBackend scripted_oracle();

}  // namespace similo
