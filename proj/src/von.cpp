#include "similo/von.hpp"

#include <algorithm>
#include <numeric>

#include "similo/error.hpp"

namespace similo {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  // The smaller root wins so every root is its component's minimum.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

bool von_related(const PropertyRecord& a, const PropertyRecord& b, double threshold) {
  return overlap_ratio(a.rect, b.rect) > threshold && center_contained(a.rect, b.rect) &&
         center_contained(b.rect, a.rect);
}

std::vector<VisualElement> merge_records(std::span<const PropertyRecord> snapshot,
                                         double threshold) {
  std::vector<const PropertyRecord*> records;
  records.reserve(snapshot.size());
  for (const auto& r : snapshot) records.push_back(&r);
  std::stable_sort(records.begin(), records.end(),
                   [](const auto* a, const auto* b) { return a->document_index < b->document_index; });

  // Sweep over x: a related pair must overlap horizontally, so only records
  // whose x-intervals intersect are compared.
  std::vector<std::size_t> by_left(records.size());
  std::iota(by_left.begin(), by_left.end(), 0);
  std::stable_sort(by_left.begin(), by_left.end(), [&](std::size_t a, std::size_t b) {
    return records[a]->rect.x < records[b]->rect.x;
  });

  DisjointSets sets(records.size());
  for (std::size_t i = 0; i < by_left.size(); ++i) {
    const auto& a = *records[by_left[i]];
    const std::int64_t right = a.rect.x + a.rect.width;
    for (std::size_t j = i + 1; j < by_left.size(); ++j) {
      const auto& b = *records[by_left[j]];
      if (b.rect.x > right) break;
      if (von_related(a, b, threshold)) sets.unite(by_left[i], by_left[j]);
    }
  }

  // Records are in document order, so roots appear in ascending order of
  // their smallest member index.
  std::vector<VisualElement> elements;
  std::vector<std::size_t> slot(records.size(), 0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::size_t root = sets.find(i);
    if (root == i) {
      slot[i] = elements.size();
      elements.emplace_back();
      elements.back().widget_id = static_cast<int>(slot[i]);
    }
    auto& element = elements[slot[root]];
    const auto& record = *records[i];
    for (const auto& [key, value] : record.values) element.at(key).insert(value);
    if (const auto* xpath = record.get(PropertyKey::kXPath)) element.member_xpaths.insert(*xpath);
    element.member_indices.push_back(record.document_index);
  }
  return elements;
}

TargetSpec apply_von_to_target(std::span<const PropertyRecord> target_nodes,
                               const std::string& anchor_xpath, const std::string& oracle_xpath,
                               double threshold) {
  auto elements = merge_records(target_nodes, threshold);
  for (auto& element : elements) {
    if (element.member_xpaths.contains(anchor_xpath)) {
      return TargetSpec{std::move(element), oracle_xpath};
    }
  }
  throw Error(ErrorCode::kOracleNotFound, "no target node has xpath \"" + anchor_xpath + "\"");
}

}  // namespace similo
