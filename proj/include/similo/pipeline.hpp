#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "similo/backend.hpp"
#include "similo/model.hpp"
#include "similo/prompt.hpp"
#include "similo/scoring.hpp"
#include "similo/von.hpp"

namespace similo {

enum class Method { kVonSimilo, kVonSimiloLlm };

std::string_view method_name(Method method);

struct LocalizationOutcome {
  std::string target_id;
  Method method = Method::kVonSimilo;
  VisualElement chosen;
  int chosen_rank = 1;
  bool located = false;
  bool oracle_in_top_k = false;
  bool fallback_used = false;
  std::optional<RerankAnswer> llm_answer;  // set when the model's answer parsed
  std::string llm_raw;                     // response text, when one arrived
  std::string llm_error;                   // error name behind a fallback

  // Monotonic wall-clock segments in milliseconds.
  double elapsed_ms = 0.0;
  double merge_ms = 0.0;
  double rank_ms = 0.0;
  double backend_ms = 0.0;

  int prompt_tokens = 0;
  int response_tokens = 0;
};

struct LocateOptions {
  double von_threshold = kDefaultVonThreshold;
  int max_prompt_tokens = kDefaultMaxPromptTokens;
};

// Exact string match against any member xpath.
bool check_oracle(const VisualElement& chosen, std::string_view oracle_xpath);

// Merge, rank and choose rank 1. Throws Error(kEmptySnapshot).
LocalizationOutcome locate_von_similo(const TargetSpec& target,
                                      std::span<const PropertyRecord> snapshot,
                                      const ScoringConfig& config, const LocateOptions& options = {});

// Merge, rank, send the top_k candidates to the model and take its pick.
// Unparsable or unknown answers, rate limiting and transport failures fall
// back to rank 1. Throws Error(kEmptySnapshot); other backend errors
// (ReplayMiss, PromptTooLarge, MissingApiKey) propagate.
LocalizationOutcome locate_von_similo_llm(const TargetSpec& target,
                                          std::span<const PropertyRecord> snapshot,
                                          const ScoringConfig& config, const PromptMode& mode,
                                          Backend& backend, const LocateOptions& options = {});

// Reranks an already merged and ranked list (rank order = span order).
LocalizationOutcome rerank_ranked(const TargetSpec& target, std::span<const ScoredCandidate> ranked,
                                  int top_k, const PromptMode& mode, Backend& backend,
                                  const LocateOptions& options = {});

}  // namespace similo
