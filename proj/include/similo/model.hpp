#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "similo/geometry.hpp"

namespace similo {

enum class PropertyKey {
  kTag,
  kVisibleText,
  kClass,
  kId,
  kName,
  kHRef,
  kAlt,
  kIsButton,
  kXPath,
  kIdXPath,
  kLocation,
  kArea,
  kShape,
  kNeighborText,
};

inline constexpr std::size_t kPropertyCount = 14;

inline constexpr std::array<PropertyKey, kPropertyCount> kAllProperties = {
    PropertyKey::kTag,      PropertyKey::kVisibleText, PropertyKey::kClass,    PropertyKey::kId,
    PropertyKey::kName,     PropertyKey::kHRef,        PropertyKey::kAlt,      PropertyKey::kIsButton,
    PropertyKey::kXPath,    PropertyKey::kIdXPath,     PropertyKey::kLocation, PropertyKey::kArea,
    PropertyKey::kShape,    PropertyKey::kNeighborText,
};

// Field name used in prompts, snapshot files and config files
// ("tag", "text", "neighbor_text", ...).
std::string_view property_name(PropertyKey key);
std::optional<PropertyKey> property_from_name(std::string_view name);

// Insertion-ordered set of distinct strings.
class ValueSet {
 public:
  ValueSet() = default;
  ValueSet(std::initializer_list<std::string> values);

  // Returns false when the value was already present.
  bool insert(std::string value);
  bool contains(std::string_view value) const;
  void merge(const ValueSet& other);

  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }
  const std::vector<std::string>& values() const { return values_; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  friend bool operator==(const ValueSet&, const ValueSet&) = default;

 private:
  std::vector<std::string> values_;
};

// One DOM node as extracted from a page snapshot.
struct PropertyRecord {
  std::map<PropertyKey, std::string> values;
  Rect rect;
  std::size_t document_index = 0;

  const std::string* get(PropertyKey key) const;
  void set(PropertyKey key, std::string value) { values[key] = std::move(value); }
};

// Fills Location and Area from the rect when absent and verifies them when
// present. Throws Error(kMalformedValue) on inconsistency or a bad XPath.
void normalize_record(PropertyRecord& record);

// A group of visually overlapping nodes with multi-valued properties.
struct VisualElement {
  int widget_id = 0;
  std::array<ValueSet, kPropertyCount> values;
  ValueSet member_xpaths;
  std::vector<std::size_t> member_indices;

  const ValueSet& at(PropertyKey key) const { return values[static_cast<std::size_t>(key)]; }
  ValueSet& at(PropertyKey key) { return values[static_cast<std::size_t>(key)]; }

  friend bool operator==(const VisualElement&, const VisualElement&) = default;
};

// Lifts a single record into a one-member element.
VisualElement element_from_record(const PropertyRecord& record, int widget_id);

struct TargetSpec {
  VisualElement desired;
  std::string oracle_xpath;
};

}  // namespace similo
