#include "similo/backend.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <openssl/evp.h>

#include "similo/error.hpp"

namespace similo {

namespace {

constexpr auto kWindow = std::chrono::seconds(60);

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kTransportError, "cannot write " + path.string());
}

std::string motivated_reply(int widget_id, std::string_view reason) {
  return "The most similar element is the one with widget_id \"" + std::to_string(widget_id) +
         "\". The reasons for this choice are:\n\n1. " + std::string(reason);
}

}  // namespace

void validate(const BackendPolicy& policy) {
  if (policy.max_requests_per_minute <= 0 || policy.max_tokens_per_minute <= 0 ||
      policy.max_prompt_tokens <= 0 || policy.max_attempts <= 0 ||
      !(policy.backoff_base_seconds > 0.0)) {
    throw Error(ErrorCode::kConfigError, "backend policy values must be positive");
  }
}

void SystemClock::sleep_until(Instant t) { std::this_thread::sleep_until(t); }

Instant SimulatedClock::now() {
  std::lock_guard lock(mutex_);
  return now_;
}

void SimulatedClock::sleep_until(Instant t) {
  std::lock_guard lock(mutex_);
  if (t > now_) now_ = t;
}

void SimulatedClock::advance(std::chrono::nanoseconds d) {
  std::lock_guard lock(mutex_);
  now_ += d;
}

RateLimiter::RateLimiter(int requests_per_minute, int tokens_per_minute, Clock& clock)
    : rpm_(requests_per_minute), tpm_(tokens_per_minute), clock_(clock) {}

Instant RateLimiter::acquire(int tokens) {
  if (tokens > tpm_) {
    throw Error(ErrorCode::kRateLimited, "request of " + std::to_string(tokens) +
                                             " tokens exceeds the per-minute budget");
  }
  while (true) {
    Instant wake;
    {
      std::lock_guard lock(mutex_);
      const Instant now = clock_.now();
      while (!window_.empty() && now - window_.front().at >= kWindow) {
        window_tokens_ -= window_.front().tokens;
        window_.pop_front();
      }
      if (static_cast<int>(window_.size()) < rpm_ && window_tokens_ + tokens <= tpm_) {
        window_.push_back({now, tokens});
        window_tokens_ += tokens;
        history_.push_back({now, tokens});
        return now;
      }
      // Earliest instant at which enough old dispatches have left the window.
      std::size_t drop = 0;
      long long remaining = window_tokens_;
      while (drop < window_.size() &&
             (static_cast<int>(window_.size() - drop) >= rpm_ || remaining + tokens > tpm_)) {
        remaining -= window_[drop].tokens;
        ++drop;
      }
      wake = window_[drop - 1].at + kWindow;
    }
    clock_.sleep_until(wake);
  }
}

std::vector<RateLimiter::Dispatch> RateLimiter::history() const {
  std::lock_guard lock(mutex_);
  return history_;
}

SendResult send(const PromptBundle& bundle, Backend& backend, const CallContext& context) {
  const auto start = std::chrono::steady_clock::now();
  SendResult result;
  result.raw = backend.complete(bundle, context);
  result.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::string api_key_from_env() {
  const char* key = std::getenv(std::string(kApiKeyEnvVar).c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorCode::kMissingApiKey,
                "set " + std::string(kApiKeyEnvVar) + " to use the live backend");
  }
  return key;
}

std::string chat_request_body(const LiveOptions& options, std::string_view prompt) {
  nlohmann::json body = {
      {"model", options.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
      {"temperature", options.temperature},
  };
  return body.dump();
}

LiveBackend::LiveBackend(LiveOptions options, std::unique_ptr<HttpTransport> transport,
                         Clock& clock)
    : options_(std::move(options)),
      transport_(std::move(transport)),
      clock_(clock),
      limiter_(options_.policy.max_requests_per_minute, options_.policy.max_tokens_per_minute,
               clock) {
  validate(options_.policy);
}

std::string LiveBackend::complete(const PromptBundle& bundle, const CallContext&) {
  if (bundle.estimated_tokens > options_.policy.max_prompt_tokens) {
    throw Error(ErrorCode::kPromptTooLarge,
                "estimated " + std::to_string(bundle.estimated_tokens) + " tokens exceeds " +
                    std::to_string(options_.policy.max_prompt_tokens));
  }
  const std::string body = chat_request_body(options_, bundle.rendered_text);
  const std::map<std::string, std::string> headers = {
      {"Authorization", "Bearer " + options_.api_key},
      {"Content-Type", "application/json"},
  };

  HttpResponse last;
  for (int attempt = 0; attempt < options_.policy.max_attempts; ++attempt) {
    if (attempt > 0) {
      const auto delay = std::chrono::duration<double>(options_.policy.backoff_base_seconds *
                                                       std::pow(2.0, attempt - 1));
      clock_.sleep_until(clock_.now() +
                         std::chrono::duration_cast<std::chrono::steady_clock::duration>(delay));
    }
    limiter_.acquire(bundle.estimated_tokens);
    last = transport_->post(options_.endpoint, headers, body);
    if (last.status == 200) {
      try {
        const auto doc = nlohmann::json::parse(last.body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kTransportError, std::string("unexpected response body: ") + e.what());
      }
    }
    const bool retryable = last.status == 0 || last.status == 429 || last.status >= 500;
    if (!retryable) break;
  }
  if (last.status == 429) {
    throw Error(ErrorCode::kRateLimited, "HTTP 429 after " +
                                             std::to_string(options_.policy.max_attempts) +
                                             " attempts");
  }
  if (last.status == 0) throw Error(ErrorCode::kTransportError, last.error);
  throw Error(ErrorCode::kTransportError,
              "HTTP " + std::to_string(last.status) + ": " + last.body.substr(0, 200));
}

std::string LiveBackend::describe() const { return "live:" + options_.model; }

std::string content_hash(std::string_view text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

TranscriptStore::TranscriptStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::optional<std::string> TranscriptStore::find(std::string_view prompt) const {
  const auto path = dir_ / (content_hash(prompt) + ".response.txt");
  if (!std::filesystem::is_regular_file(path)) return std::nullopt;
  return read_file(path);
}

void TranscriptStore::save(std::string_view prompt, std::string_view response) const {
  std::filesystem::create_directories(dir_);
  const std::string hash = content_hash(prompt);
  write_file(dir_ / (hash + ".request.txt"), prompt);
  write_file(dir_ / (hash + ".response.txt"), response);
}

std::string ReplayBackend::complete(const PromptBundle& bundle, const CallContext&) {
  if (auto response = store_.find(bundle.rendered_text)) return *response;
  throw Error(ErrorCode::kReplayMiss, "no transcript " + content_hash(bundle.rendered_text) +
                                          " in " + store_.dir().string());
}

std::string ReplayBackend::describe() const { return "replay:" + store_.dir().string(); }

std::string RecordingBackend::complete(const PromptBundle& bundle, const CallContext& context) {
  std::string response = inner_.complete(bundle, context);
  store_.save(bundle.rendered_text, response);
  return response;
}

std::string RecordingBackend::describe() const {
  return inner_.describe() + " (recording to " + store_.dir().string() + ")";
}

ScriptedBackend::ScriptedBackend(std::string name, Responder responder, int)
    : name_(std::move(name)), responder_(std::move(responder)) {}

ScriptedBackend::ScriptedBackend(std::string name, Chooser chooser)
    : name_(std::move(name)) {
  responder_ = [chooser = std::move(chooser), label = name_](const PromptBundle& bundle,
                                                             const CallContext& context) {
    const int id = chooser(bundle, context);
    if (context.kind == PromptTemplate::kIdOnly) return std::to_string(id);
    return motivated_reply(id, "Chosen by the scripted backend (" + label + ").");
  };
}

ScriptedBackend ScriptedBackend::raw(std::string name, Responder responder) {
  return ScriptedBackend(std::move(name), std::move(responder), 0);
}

std::string ScriptedBackend::complete(const PromptBundle& bundle, const CallContext& context) {
  return responder_(bundle, context);
}

ScriptedBackend scripted_rank1() {
  return ScriptedBackend("rank1", [](const PromptBundle& bundle, const CallContext& context) {
    if (!context.candidates.empty()) return context.candidates.front().element.widget_id;
    return bundle.candidate_ids.empty() ? 0 : bundle.candidate_ids.front();
  });
}

ScriptedBackend scripted_oracle() {
  return ScriptedBackend("oracle", [](const PromptBundle& bundle, const CallContext& context) {
    for (const auto& c : context.candidates) {
      if (c.element.member_xpaths.contains(context.oracle_xpath)) return c.element.widget_id;
    }
    if (!context.candidates.empty()) return context.candidates.front().element.widget_id;
    return bundle.candidate_ids.empty() ? 0 : bundle.candidate_ids.front();
  });
}

}  // namespace similo
