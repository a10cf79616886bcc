#include "similo/model.hpp"

#include <algorithm>
#include <charconv>

#include "similo/error.hpp"

namespace similo {

namespace {

constexpr std::array<std::string_view, kPropertyCount> kNames = {
    "tag",   "text",    "class",    "id",   "name",  "href",  "alt",
    "is_button", "xpath", "id_xpath", "location", "area", "shape", "neighbor_text",
};

bool parse_int(std::string_view s, std::int64_t& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::string_view property_name(PropertyKey key) { return kNames[static_cast<std::size_t>(key)]; }

std::optional<PropertyKey> property_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return kAllProperties[i];
  }
  return std::nullopt;
}

ValueSet::ValueSet(std::initializer_list<std::string> values) {
  for (const auto& v : values) insert(v);
}

bool ValueSet::insert(std::string value) {
  if (contains(value)) return false;
  values_.push_back(std::move(value));
  return true;
}

bool ValueSet::contains(std::string_view value) const {
  return std::find(values_.begin(), values_.end(), value) != values_.end();
}

void ValueSet::merge(const ValueSet& other) {
  for (const auto& v : other.values_) insert(v);
}

const std::string* PropertyRecord::get(PropertyKey key) const {
  auto it = values.find(key);
  return it == values.end() ? nullptr : &it->second;
}

void normalize_record(PropertyRecord& record) {
  if (record.rect.width < 0 || record.rect.height < 0) {
    throw Error(ErrorCode::kMalformedValue, "negative rect size");
  }
  if (const auto* xpath = record.get(PropertyKey::kXPath)) {
    if (xpath->empty() || xpath->front() != '/') {
      throw Error(ErrorCode::kMalformedValue, "xpath must start with '/': \"" + *xpath + "\"");
    }
  }
  const std::string location =
      std::to_string(record.rect.x) + "," + std::to_string(record.rect.y);
  if (const auto* given = record.get(PropertyKey::kLocation)) {
    const auto comma = given->find(',');
    std::int64_t x = 0;
    std::int64_t y = 0;
    if (comma == std::string::npos || !parse_int(std::string_view(*given).substr(0, comma), x) ||
        !parse_int(std::string_view(*given).substr(comma + 1), y) || x != record.rect.x ||
        y != record.rect.y) {
      throw Error(ErrorCode::kMalformedValue,
                  "location \"" + *given + "\" does not match rect " + location);
    }
  } else {
    record.set(PropertyKey::kLocation, location);
  }
  const std::string area = std::to_string(record.rect.area());
  if (const auto* given = record.get(PropertyKey::kArea)) {
    std::int64_t value = 0;
    if (!parse_int(*given, value) || value != record.rect.area()) {
      throw Error(ErrorCode::kMalformedValue,
                  "area \"" + *given + "\" does not match width*height " + area);
    }
  } else {
    record.set(PropertyKey::kArea, area);
  }
}

VisualElement element_from_record(const PropertyRecord& record, int widget_id) {
  VisualElement element;
  element.widget_id = widget_id;
  for (const auto& [key, value] : record.values) element.at(key).insert(value);
  if (const auto* xpath = record.get(PropertyKey::kXPath)) element.member_xpaths.insert(*xpath);
  element.member_indices.push_back(record.document_index);
  return element;
}

}  // namespace similo
