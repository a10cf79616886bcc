#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "similo/model.hpp"

namespace similo {

enum class ComparatorKind {
  kExactIgnoreCase,
  kStringDistance,
  kWordOverlap,
  kPointDistance,
  kNumericRatio,
};

std::string_view comparator_name(ComparatorKind kind);
std::optional<ComparatorKind> comparator_from_name(std::string_view name);

struct PropertyRule {
  ComparatorKind comparator = ComparatorKind::kExactIgnoreCase;
  double weight = 0.0;
};

struct ScoringConfig {
  std::array<PropertyRule, kPropertyCount> rules;
  double point_cutoff_px = 100.0;
  int top_k = 10;

  const PropertyRule& rule(PropertyKey key) const { return rules[static_cast<std::size_t>(key)]; }
  PropertyRule& rule(PropertyKey key) { return rules[static_cast<std::size_t>(key)]; }

  // Tag/IsButton exact; identifiers, texts and paths by edit distance;
  // neighbor text by word overlap; location by point distance; area and
  // shape by ratio. Weight 1.5 on id, name, text and neighbor text, 0.5
  // elsewhere.
  static ScoringConfig defaults();
};

// Validates weights (finite, >= 0), cutoff (> 0) and top_k (>= 1).
// Throws Error(kConfigError).
void validate(const ScoringConfig& config);

// JSON config: {"point_cutoff_px": 100, "top_k": 10,
//               "properties": {"tag": {"comparator": "exact_ignore_case",
//                                      "weight": 0.5}, ...}}
// Unlisted properties and fields keep their defaults.
ScoringConfig parse_scoring_config(std::string_view json_text);
ScoringConfig load_scoring_config(const std::filesystem::path& path);
std::string to_json(const ScoringConfig& config);

// Unit-cost Levenshtein distance over UTF-8 code points.
std::size_t edit_distance(std::string_view a, std::string_view b);

// Throws Error(kMalformedValue) when a point or numeric value does not parse.
double compare_values(ComparatorKind kind, std::string_view a, std::string_view b,
                      double cutoff_px = 100.0);

// Best comparison over all value pairs; 0 when either side is empty.
// Malformed pairs contribute 0.
double property_score(ComparatorKind kind, const ValueSet& a, const ValueSet& b,
                      double cutoff_px = 100.0);

double similarity_score(const TargetSpec& target, const VisualElement& candidate,
                        const ScoringConfig& config);

struct ScoredCandidate {
  VisualElement element;
  double score = 0.0;
  int rank = 1;
};

// Sorted by descending score, ties by ascending widget id; ranks are 1-based.
std::vector<ScoredCandidate> rank_candidates(const TargetSpec& target,
                                             std::span<const VisualElement> candidates,
                                             const ScoringConfig& config);

std::vector<ScoredCandidate> take_top(std::vector<ScoredCandidate> ranked, int k);

}  // namespace similo
