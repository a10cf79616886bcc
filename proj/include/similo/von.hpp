#pragma once

#include <span>
#include <string>
#include <vector>

#include "similo/model.hpp"

namespace similo {

inline constexpr double kDefaultVonThreshold = 0.85;

// Two nodes belong to the same visual element when their overlap ratio
// exceeds `threshold` and each center lies inside the other's rectangle.
bool von_related(const PropertyRecord& a, const PropertyRecord& b,
                 double threshold = kDefaultVonThreshold);

// Groups records into connected components of von_related and merges each
// component into one VisualElement. Widget ids follow the smallest member
// document index, starting at 0. Output order is by widget id.
std::vector<VisualElement> merge_records(std::span<const PropertyRecord> snapshot,
                                         double threshold = kDefaultVonThreshold);

// Merges the old-version nodes and returns the component that contains the
// node whose XPath equals `anchor_xpath`. Throws Error(kOracleNotFound).
TargetSpec apply_von_to_target(std::span<const PropertyRecord> target_nodes,
                               const std::string& anchor_xpath, const std::string& oracle_xpath,
                               double threshold = kDefaultVonThreshold);

inline TargetSpec apply_von_to_target(std::span<const PropertyRecord> target_nodes,
                                      const std::string& oracle_xpath,
                                      double threshold = kDefaultVonThreshold) {
  return apply_von_to_target(target_nodes, oracle_xpath, oracle_xpath, threshold);
}

}  // namespace similo
