#include "similo/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "similo/error.hpp"

namespace similo {

namespace {

using Stopwatch = std::chrono::steady_clock;

double ms_since(Stopwatch::time_point start) {
  return std::chrono::duration<double, std::milli>(Stopwatch::now() - start).count();
}

bool oracle_among(std::span<const ScoredCandidate> top, std::string_view oracle_xpath) {
  return std::any_of(top.begin(), top.end(), [&](const ScoredCandidate& c) {
    return check_oracle(c.element, oracle_xpath);
  });
}

void require_snapshot(std::span<const PropertyRecord> snapshot) {
  if (snapshot.empty()) throw Error(ErrorCode::kEmptySnapshot, "snapshot has no records");
}

void choose(LocalizationOutcome& outcome, const ScoredCandidate& c, std::string_view oracle_xpath) {
  outcome.chosen = c.element;
  outcome.chosen_rank = c.rank;
  outcome.located = check_oracle(c.element, oracle_xpath);
}

}  // namespace

std::string_view method_name(Method method) {
  return method == Method::kVonSimilo ? "VON Similo" : "VON Similo LLM";
}

bool check_oracle(const VisualElement& chosen, std::string_view oracle_xpath) {
  return chosen.member_xpaths.contains(oracle_xpath);
}

LocalizationOutcome locate_von_similo(const TargetSpec& target,
                                      std::span<const PropertyRecord> snapshot,
                                      const ScoringConfig& config, const LocateOptions& options) {
  require_snapshot(snapshot);
  const auto start = Stopwatch::now();
  LocalizationOutcome outcome;
  outcome.method = Method::kVonSimilo;

  const auto candidates = merge_records(snapshot, options.von_threshold);
  outcome.merge_ms = ms_since(start);
  const auto rank_start = Stopwatch::now();
  const auto ranked = rank_candidates(target, candidates, config);
  choose(outcome, ranked.front(), target.oracle_xpath);
  outcome.rank_ms = ms_since(rank_start);
  outcome.elapsed_ms = ms_since(start);

  const std::size_t k = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(config.top_k));
  outcome.oracle_in_top_k =
      oracle_among(std::span(ranked).first(k), target.oracle_xpath);
  return outcome;
}

LocalizationOutcome rerank_ranked(const TargetSpec& target, std::span<const ScoredCandidate> ranked,
                                  int top_k, const PromptMode& mode, Backend& backend,
                                  const LocateOptions& options) {
  if (ranked.empty()) throw Error(ErrorCode::kEmptySnapshot, "no candidates to rerank");
  const auto start = Stopwatch::now();
  LocalizationOutcome outcome;
  outcome.method = Method::kVonSimiloLlm;
  const std::size_t k = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(std::max(top_k, 1)));
  const auto top = ranked.first(k);
  outcome.oracle_in_top_k = oracle_among(top, target.oracle_xpath);

  const auto bundle = build_prompt(target, top, mode, options.max_prompt_tokens);
  outcome.prompt_tokens = bundle.estimated_tokens;

  const CallContext context{top, target.oracle_xpath, mode.kind};
  const auto backend_start = Stopwatch::now();
  try {
    const auto result = send(bundle, backend, context);
    outcome.llm_raw = result.raw;
    outcome.response_tokens = estimate_tokens(result.raw);
    auto answer = parse_answer(result.raw, bundle, mode.kind);
    const auto it = std::find_if(top.begin(), top.end(), [&](const ScoredCandidate& c) {
      return c.element.widget_id == answer.widget_id;
    });
    choose(outcome, *it, target.oracle_xpath);
    outcome.llm_answer = std::move(answer);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kUnparsableAnswer:
      case ErrorCode::kUnknownWidgetId:
      case ErrorCode::kRateLimited:
      case ErrorCode::kTransportError:
        outcome.fallback_used = true;
        outcome.llm_error = std::string(e.name());
        choose(outcome, top.front(), target.oracle_xpath);
        break;
      default:
        throw;
    }
  }
  outcome.backend_ms = ms_since(backend_start);
  outcome.elapsed_ms = ms_since(start);
  return outcome;
}

LocalizationOutcome locate_von_similo_llm(const TargetSpec& target,
                                          std::span<const PropertyRecord> snapshot,
                                          const ScoringConfig& config, const PromptMode& mode,
                                          Backend& backend, const LocateOptions& options) {
  require_snapshot(snapshot);
  const auto start = Stopwatch::now();
  const auto candidates = merge_records(snapshot, options.von_threshold);
  const double merge_ms = ms_since(start);
  const auto rank_start = Stopwatch::now();
  const auto ranked = rank_candidates(target, candidates, config);
  const double rank_ms = ms_since(rank_start);

  auto outcome = rerank_ranked(target, ranked, config.top_k, mode, backend, options);
  outcome.merge_ms = merge_ms;
  outcome.rank_ms = rank_ms;
  outcome.elapsed_ms = ms_since(start);
  return outcome;
}

}  // namespace similo
