#include "similo/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "similo/error.hpp"

namespace similo {

namespace {

using json = nlohmann::json;

constexpr std::array<std::string_view, 5> kComparatorNames = {
    "exact_ignore_case", "string_distance", "word_overlap", "point_distance", "numeric_ratio",
};

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool ascii_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Invalid bytes decode as themselves so every input has a decoding.
std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = lead;
    if (lead >= 0xF0 && lead <= 0xF4) {
      len = 4;
      cp = lead & 0x07;
    } else if (lead >= 0xE0 && lead <= 0xEF) {
      len = 3;
      cp = lead & 0x0F;
    } else if (lead >= 0xC2 && lead < 0xE0) {
      len = 2;
      cp = lead & 0x1F;
    }
    bool ok = len > 1 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto cont = static_cast<unsigned char>(s[i + k]);
      if ((cont & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (cont & 0x3F);
    }
    if (!ok) {
      out.push_back(lead);
      ++i;
    } else {
      out.push_back(cp);
      i += len;
    }
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view s) {
  const auto t = trim(s);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::kMalformedValue, "not a number: \"" + std::string(s) + "\"");
  }
  return value;
}

std::pair<double, double> parse_point(std::string_view s) {
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) {
    throw Error(ErrorCode::kMalformedValue, "not an \"x,y\" point: \"" + std::string(s) + "\"");
  }
  return {parse_number(s.substr(0, comma)), parse_number(s.substr(comma + 1))};
}

std::set<std::string> word_set(std::string_view s) {
  std::set<std::string> words;
  std::string current;
  for (char c : s) {
    if (ascii_alnum(c)) {
      current.push_back(ascii_lower(c));
    } else if (!current.empty()) {
      words.insert(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.insert(std::move(current));
  return words;
}

}  // namespace

std::string_view comparator_name(ComparatorKind kind) {
  return kComparatorNames[static_cast<std::size_t>(kind)];
}

std::optional<ComparatorKind> comparator_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kComparatorNames.size(); ++i) {
    if (kComparatorNames[i] == name) return static_cast<ComparatorKind>(i);
  }
  return std::nullopt;
}

ScoringConfig ScoringConfig::defaults() {
  ScoringConfig config;
  for (auto key : kAllProperties) {
    auto& rule = config.rule(key);
    switch (key) {
      case PropertyKey::kTag:
      case PropertyKey::kIsButton:
        rule.comparator = ComparatorKind::kExactIgnoreCase;
        break;
      case PropertyKey::kNeighborText:
        rule.comparator = ComparatorKind::kWordOverlap;
        break;
      case PropertyKey::kLocation:
        rule.comparator = ComparatorKind::kPointDistance;
        break;
      case PropertyKey::kArea:
      case PropertyKey::kShape:
        rule.comparator = ComparatorKind::kNumericRatio;
        break;
      default:
        rule.comparator = ComparatorKind::kStringDistance;
        break;
    }
    const bool heavy = key == PropertyKey::kId || key == PropertyKey::kName ||
                       key == PropertyKey::kVisibleText || key == PropertyKey::kNeighborText;
    rule.weight = heavy ? 1.5 : 0.5;
  }
  return config;
}

void validate(const ScoringConfig& config) {
  for (auto key : kAllProperties) {
    const double w = config.rule(key).weight;
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::kConfigError,
                  "weight of " + std::string(property_name(key)) + " must be finite and >= 0");
    }
  }
  if (!std::isfinite(config.point_cutoff_px) || config.point_cutoff_px <= 0.0) {
    throw Error(ErrorCode::kConfigError, "point_cutoff_px must be > 0");
  }
  if (config.top_k < 1) throw Error(ErrorCode::kConfigError, "top_k must be >= 1");
}

ScoringConfig parse_scoring_config(std::string_view json_text) {
  ScoringConfig config = ScoringConfig::defaults();
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kConfigError, "config must be a JSON object");
  try {
    for (const auto& [field, value] : doc.items()) {
      if (field == "point_cutoff_px") {
        config.point_cutoff_px = value.get<double>();
      } else if (field == "top_k") {
        config.top_k = value.get<int>();
      } else if (field == "properties") {
        for (const auto& [name, entry] : value.items()) {
          const auto key = property_from_name(name);
          if (!key) throw Error(ErrorCode::kConfigError, "unknown property \"" + name + "\"");
          auto& rule = config.rule(*key);
          if (entry.contains("comparator")) {
            const auto cmp_name = entry.at("comparator").get<std::string>();
            const auto cmp = comparator_from_name(cmp_name);
            if (!cmp) throw Error(ErrorCode::kConfigError, "unknown comparator \"" + cmp_name + "\"");
            rule.comparator = *cmp;
          }
          if (entry.contains("weight")) rule.weight = entry.at("weight").get<double>();
        }
      } else {
        throw Error(ErrorCode::kConfigError, "unknown config field \"" + field + "\"");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
  validate(config);
  return config;
}

ScoringConfig load_scoring_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scoring_config(buffer.str());
}

std::string to_json(const ScoringConfig& config) {
  json props = json::object();
  for (auto key : kAllProperties) {
    props[std::string(property_name(key))] = {
        {"comparator", std::string(comparator_name(config.rule(key).comparator))},
        {"weight", config.rule(key).weight},
    };
  }
  json doc = {{"point_cutoff_px", config.point_cutoff_px},
              {"top_k", config.top_k},
              {"properties", props}};
  return doc.dump(2);
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  const auto x = decode_utf8(a);
  const auto y = decode_utf8(b);
  if (x.empty()) return y.size();
  if (y.empty()) return x.size();
  std::vector<std::size_t> row(y.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i + 1;
    for (std::size_t j = 0; j < y.size(); ++j) {
      const std::size_t above = row[j + 1];
      const std::size_t substitute = diagonal + (x[i] == y[j] ? 0 : 1);
      row[j + 1] = std::min({above + 1, row[j] + 1, substitute});
      diagonal = above;
    }
  }
  return row[y.size()];
}

double compare_values(ComparatorKind kind, std::string_view a, std::string_view b,
                      double cutoff_px) {
  switch (kind) {
    case ComparatorKind::kExactIgnoreCase: {
      if (a.size() != b.size()) return 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (ascii_lower(a[i]) != ascii_lower(b[i])) return 0.0;
      }
      return 1.0;
    }
    case ComparatorKind::kStringDistance: {
      const std::size_t longest = std::max(decode_utf8(a).size(), decode_utf8(b).size());
      if (longest == 0) return 1.0;
      return 1.0 - static_cast<double>(edit_distance(a, b)) / static_cast<double>(longest);
    }
    case ComparatorKind::kWordOverlap: {
      const auto wa = word_set(a);
      const auto wb = word_set(b);
      if (wa.empty() && wb.empty()) return 1.0;
      std::size_t common = 0;
      for (const auto& w : wa) common += wb.count(w);
      const std::size_t all = wa.size() + wb.size() - common;
      return static_cast<double>(common) / static_cast<double>(all);
    }
    case ComparatorKind::kPointDistance: {
      const auto [ax, ay] = parse_point(a);
      const auto [bx, by] = parse_point(b);
      const double distance = std::hypot(ax - bx, ay - by);
      return std::max(0.0, 1.0 - distance / cutoff_px);
    }
    case ComparatorKind::kNumericRatio: {
      const double va = parse_number(a);
      const double vb = parse_number(b);
      if (va < 0.0 || vb < 0.0) {
        throw Error(ErrorCode::kMalformedValue, "negative value in numeric ratio");
      }
      const double hi = std::max(va, vb);
      if (hi == 0.0) return 1.0;
      return std::min(va, vb) / hi;
    }
  }
  return 0.0;
}

double property_score(ComparatorKind kind, const ValueSet& a, const ValueSet& b,
                      double cutoff_px) {
  double best = 0.0;
  for (const auto& va : a) {
    for (const auto& vb : b) {
      double s = 0.0;
      try {
        s = compare_values(kind, va, vb, cutoff_px);
      } catch (const Error&) {
        s = 0.0;
      }
      if (s > best) {
        best = s;
        if (best >= 1.0) return best;
      }
    }
  }
  return best;
}

double similarity_score(const TargetSpec& target, const VisualElement& candidate,
                        const ScoringConfig& config) {
  double total = 0.0;
  for (auto key : kAllProperties) {
    const auto& rule = config.rule(key);
    if (rule.weight == 0.0) continue;
    total += rule.weight * property_score(rule.comparator, target.desired.at(key),
                                          candidate.at(key), config.point_cutoff_px);
  }
  return total;
}

std::vector<ScoredCandidate> rank_candidates(const TargetSpec& target,
                                             std::span<const VisualElement> candidates,
                                             const ScoringConfig& config) {
  std::vector<ScoredCandidate> ranked;
  ranked.reserve(candidates.size());
  for (const auto& c : candidates) ranked.push_back({c, similarity_score(target, c, config), 0});
  std::sort(ranked.begin(), ranked.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.element.widget_id < b.element.widget_id;
  });
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = static_cast<int>(i) + 1;
  return ranked;
}

std::vector<ScoredCandidate> take_top(std::vector<ScoredCandidate> ranked, int k) {
  if (k >= 0 && ranked.size() > static_cast<std::size_t>(k)) ranked.resize(k);
  return ranked;
}

}  // namespace similo
