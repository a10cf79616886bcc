#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "similo/model.hpp"
#include "similo/scoring.hpp"

namespace similo {

enum class PromptTemplate {
  kIdOnly,           // answer is the widget id only
  kWithMotivations,  // widget id followed by a numbered list of reasons
};

// A worked example prepended to the task in one-shot mode.
struct PromptExample {
  std::vector<VisualElement> candidates;
  VisualElement desired;
  std::string id_only_answer;
  std::string motivated_answer;
};

struct PromptMode {
  PromptTemplate kind = PromptTemplate::kIdOnly;
  std::optional<PromptExample> example;  // set for one-shot

  static PromptMode zero_shot(PromptTemplate kind) { return {kind, std::nullopt}; }
  static PromptMode one_shot(PromptTemplate kind);  // uses default_prompt_example()
};

// Small synthetic example shipped with the library.
const PromptExample& default_prompt_example();

inline constexpr int kDefaultMaxPromptTokens = 8192;

struct PromptBundle {
  std::string rendered_text;
  std::vector<int> candidate_ids;
  int estimated_tokens = 0;
};

struct RerankAnswer {
  int widget_id = 0;
  std::vector<std::string> motivations;
  std::string raw_response;
};

// ceil(length / 4): the four-characters-per-token heuristic.
int estimate_tokens(std::string_view text);

// One line in the `{widget_id:"3",tag:"div || input",...}` form. Keys come in
// a fixed order; empty value sets are omitted; multiple values are joined
// with " || ". The IdXPath property is not part of the prompt form.
std::string serialize_element(const VisualElement& element, bool include_widget_id);

// Inverse of serialize_element. Throws Error(kParseError).
VisualElement parse_element(std::string_view line);

// Header, one line per candidate in the given order, a blank line, the
// instruction and the desired element. Throws Error(kPromptTooLarge) when
// the estimate exceeds `max_prompt_tokens`.
PromptBundle build_prompt(const TargetSpec& target, std::span<const ScoredCandidate> top,
                          const PromptMode& mode, int max_prompt_tokens = kDefaultMaxPromptTokens);

PromptBundle build_prompt(const VisualElement& desired, std::span<const VisualElement> candidates,
                          const PromptMode& mode, int max_prompt_tokens = kDefaultMaxPromptTokens);

// Throws Error(kUnparsableAnswer) when no integer is present and
// Error(kUnknownWidgetId) when the answered id is not one of the bundle's.
RerankAnswer parse_answer(std::string_view raw, const PromptBundle& bundle,
                          PromptTemplate kind);

}  // namespace similo
