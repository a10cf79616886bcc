#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "similo/corpus.hpp"
#include "similo/pipeline.hpp"
#include "similo/prompt.hpp"

namespace similo {

inline constexpr double kGpt4PricePer1kTokens = 0.03;

// 100 * numerator / denominator rounded half-up to `decimals` places, using
// integer arithmetic so that e.g. 734/804 reports exactly 91.3.
// Returns 0 for a zero denominator.
double percent(long long numerator, long long denominator, int decimals = 1);

struct MethodStats {
  std::string label;
  int total = 0;
  int located = 0;
  int not_located = 0;
  double pct_located = 0.0;  // one decimal
  double mean_ms = 0.0;
  double std_ms = 0.0;  // population standard deviation
  long long prompt_tokens = 0;
  long long response_tokens = 0;
  double cost_usd = 0.0;
  int oracle_not_in_top_k = 0;
  int fallbacks = 0;
};

struct Venn {
  int both = 0;
  int only_a = 0;
  int only_b = 0;
  int neither = 0;

  friend bool operator==(const Venn&, const Venn&) = default;
};

struct RunReport {
  MethodStats a;
  MethodStats b;
  Venn venn;
  double not_located_reduction_pct = 0.0;  // (na - nb) / na, one decimal
};

MethodStats summarize(std::span<const LocalizationOutcome> outcomes, std::string label,
                      double price_per_1k_tokens = kGpt4PricePer1kTokens);

// Both sides must cover the same pair ids. Throws Error(kMismatchedCorpora).
RunReport compute_report(std::span<const LocalizationOutcome> a,
                         std::span<const LocalizationOutcome> b,
                         double price_per_1k_tokens = kGpt4PricePer1kTokens);

// (sum of estimated prompt and response tokens) / 1000 * price.
double estimate_cost(std::span<const PromptBundle> bundles, std::span<const std::string> responses,
                     double price_per_1k_tokens = kGpt4PricePer1kTokens);
double estimate_cost_tokens(long long tokens, double price_per_1k_tokens = kGpt4PricePer1kTokens);

enum class MotivationCategory { kComparisonOperator, kSemanticUnderstanding, kContextAwareness };

std::string_view category_name(MotivationCategory category);
// Accepts "comparison_operator", "Comparison operator", "ComparisonOperator", ...
std::optional<MotivationCategory> category_from_name(std::string_view name);

struct MotivationRecord {
  std::string pair_id;
  int motivation_index = 0;
  std::string motivation_text;
  MotivationCategory category = MotivationCategory::kComparisonOperator;
};

struct CategoryDistribution {
  std::array<int, 3> counts{};
  std::array<int, 3> percents{};  // integer percent, half-up
  int total = 0;
};

CategoryDistribution aggregate_motivations(std::span<const MotivationRecord> records);

// RFC 4180 style CSV.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_row(const std::vector<std::string>& fields);

// Columns pair_id, motivation_index, motivation_text, category.
// Throws Error(kParseError).
std::vector<MotivationRecord> load_annotations(const std::filesystem::path& path);

// Per-pair outcome table. Timing columns end in "_ms".
std::string outcomes_csv(std::span<const LocalizationOutcome> outcomes,
                         const std::vector<CorpusEntry>& corpus);

// Annotation template for phase-2 motivations (category column left empty).
std::string motivations_csv(std::span<const LocalizationOutcome> phase2);

struct SummaryInput {
  std::optional<MethodStats> phase1;
  std::optional<MethodStats> phase2;
  std::optional<MethodStats> phase3;
  std::optional<RunReport> comparison;  // phase 1 vs phase 3
  std::optional<CategoryDistribution> categories;
  int phase2_motivations = 0;
};

std::string summary_markdown(const SummaryInput& input);

}  // namespace similo
