#include "similo/report.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "similo/error.hpp"

namespace similo {

namespace {

long long pow10(int n) {
  long long p = 1;
  while (n-- > 0) p *= 10;
  return p;
}

std::string fixed(double value, int decimals) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(decimals);
  out << value;
  return out.str();
}

std::string join_xpaths(const VisualElement& e) {
  std::string out;
  for (const auto& x : e.member_xpaths) {
    if (!out.empty()) out += " || ";
    out += x;
  }
  return out;
}

}  // namespace

double percent(long long numerator, long long denominator, int decimals) {
  if (denominator == 0) return 0.0;
  const bool negative = (numerator < 0) != (denominator < 0);
  const long long num = std::llabs(numerator);
  const long long den = std::llabs(denominator);
  const long long scale = 100 * pow10(decimals);
  // floor(scale * num / den + 1/2)
  const long long units = (2 * scale * num + den) / (2 * den);
  const double value = static_cast<double>(units) / static_cast<double>(pow10(decimals));
  return negative ? -value : value;
}

MethodStats summarize(std::span<const LocalizationOutcome> outcomes, std::string label,
                      double price_per_1k_tokens) {
  MethodStats s;
  s.label = std::move(label);
  s.total = static_cast<int>(outcomes.size());
  double sum = 0.0;
  for (const auto& o : outcomes) {
    s.located += o.located ? 1 : 0;
    s.prompt_tokens += o.prompt_tokens;
    s.response_tokens += o.response_tokens;
    s.oracle_not_in_top_k += o.oracle_in_top_k ? 0 : 1;
    s.fallbacks += o.fallback_used ? 1 : 0;
    sum += o.elapsed_ms;
  }
  s.not_located = s.total - s.located;
  s.pct_located = percent(s.located, s.total);
  if (s.total > 0) {
    s.mean_ms = sum / s.total;
    double squares = 0.0;
    for (const auto& o : outcomes) squares += (o.elapsed_ms - s.mean_ms) * (o.elapsed_ms - s.mean_ms);
    s.std_ms = std::sqrt(squares / s.total);
  }
  s.cost_usd = estimate_cost_tokens(s.prompt_tokens + s.response_tokens, price_per_1k_tokens);
  return s;
}

RunReport compute_report(std::span<const LocalizationOutcome> a,
                         std::span<const LocalizationOutcome> b, double price_per_1k_tokens) {
  std::map<std::string, bool> located_a;
  for (const auto& o : a) {
    if (!located_a.emplace(o.target_id, o.located).second) {
      throw Error(ErrorCode::kMismatchedCorpora, "duplicate pair id " + o.target_id);
    }
  }
  std::map<std::string, bool> located_b;
  for (const auto& o : b) {
    if (!located_b.emplace(o.target_id, o.located).second) {
      throw Error(ErrorCode::kMismatchedCorpora, "duplicate pair id " + o.target_id);
    }
  }
  if (located_a.size() != located_b.size()) {
    throw Error(ErrorCode::kMismatchedCorpora, "outcome sets cover different pairs");
  }

  RunReport report;
  for (const auto& [pair, in_a] : located_a) {
    const auto it = located_b.find(pair);
    if (it == located_b.end()) {
      throw Error(ErrorCode::kMismatchedCorpora, "pair " + pair + " missing from second run");
    }
    const bool in_b = it->second;
    if (in_a && in_b) {
      ++report.venn.both;
    } else if (in_a) {
      ++report.venn.only_a;
    } else if (in_b) {
      ++report.venn.only_b;
    } else {
      ++report.venn.neither;
    }
  }
  report.a = summarize(a, std::string(method_name(Method::kVonSimilo)), price_per_1k_tokens);
  report.b = summarize(b, std::string(method_name(Method::kVonSimiloLlm)), price_per_1k_tokens);
  if (!a.empty()) report.a.label = std::string(method_name(a.front().method));
  if (!b.empty()) report.b.label = std::string(method_name(b.front().method));
  report.not_located_reduction_pct =
      percent(report.a.not_located - report.b.not_located, report.a.not_located);
  return report;
}

double estimate_cost_tokens(long long tokens, double price_per_1k_tokens) {
  return static_cast<double>(tokens) / 1000.0 * price_per_1k_tokens;
}

double estimate_cost(std::span<const PromptBundle> bundles, std::span<const std::string> responses,
                     double price_per_1k_tokens) {
  long long tokens = 0;
  for (const auto& b : bundles) tokens += estimate_tokens(b.rendered_text);
  for (const auto& r : responses) tokens += estimate_tokens(r);
  return estimate_cost_tokens(tokens, price_per_1k_tokens);
}

std::string_view category_name(MotivationCategory category) {
  switch (category) {
    case MotivationCategory::kComparisonOperator: return "comparison_operator";
    case MotivationCategory::kSemanticUnderstanding: return "semantic_understanding";
    case MotivationCategory::kContextAwareness: return "context_awareness";
  }
  return "";
}

std::optional<MotivationCategory> category_from_name(std::string_view name) {
  std::string folded;
  for (char c : name) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      folded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (folded == "comparisonoperator") return MotivationCategory::kComparisonOperator;
  if (folded == "semanticunderstanding") return MotivationCategory::kSemanticUnderstanding;
  if (folded == "contextawareness") return MotivationCategory::kContextAwareness;
  return std::nullopt;
}

CategoryDistribution aggregate_motivations(std::span<const MotivationRecord> records) {
  CategoryDistribution d;
  for (const auto& r : records) ++d.counts[static_cast<std::size_t>(r.category)];
  d.total = static_cast<int>(records.size());
  for (std::size_t i = 0; i < d.counts.size(); ++i) {
    d.percents[i] = static_cast<int>(percent(d.counts[i], d.total, 0));
  }
  return d;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_has_content = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_has_content = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_has_content || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        field.clear();
        row.clear();
        row_has_content = false;
        break;
      default:
        field.push_back(c);
        row_has_content = true;
    }
  }
  if (quoted) throw Error(ErrorCode::kParseError, "unterminated quoted CSV field");
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.push_back(',');
    const auto& f = fields[i];
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      out += f;
      continue;
    }
    out.push_back('"');
    for (char c : f) {
      if (c == '"') out.push_back('"');
      out.push_back(c);
    }
    out.push_back('"');
  }
  out.push_back('\n');
  return out;
}

std::vector<MotivationRecord> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParseError, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto rows = parse_csv(buffer.str());
  if (rows.empty()) return {};
  const std::vector<std::string> expected = {"pair_id", "motivation_index", "motivation_text",
                                             "category"};
  if (rows.front() != expected) {
    throw Error(ErrorCode::kParseError,
                path.string() + ": header must be pair_id,motivation_index,motivation_text,category");
  }
  std::vector<MotivationRecord> records;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string where = path.string() + ":" + std::to_string(i + 1) + ": ";
    if (row.size() != 4) throw Error(ErrorCode::kParseError, where + "expected 4 columns");
    MotivationRecord r;
    r.pair_id = row[0];
    try {
      std::size_t used = 0;
      r.motivation_index = std::stoi(row[1], &used);
      if (used != row[1].size()) throw std::invalid_argument("index");
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kParseError, where + "motivation_index must be an integer");
    }
    r.motivation_text = row[2];
    const auto category = category_from_name(row[3]);
    if (!category) {
      throw Error(ErrorCode::kParseError, where + "unknown category \"" + row[3] + "\"");
    }
    r.category = *category;
    records.push_back(std::move(r));
  }
  return records;
}

std::string outcomes_csv(std::span<const LocalizationOutcome> outcomes,
                         const std::vector<CorpusEntry>& corpus) {
  std::map<std::string, std::string> app_of;
  for (const auto& e : corpus) app_of[e.pair_id] = e.app_id;
  std::string out = csv_row({"pair_id", "app_id", "method", "chosen_widget_id", "chosen_rank",
                             "chosen_xpaths", "located", "oracle_in_top_k", "fallback_used",
                             "llm_widget_id", "llm_error", "prompt_tokens", "response_tokens",
                             "elapsed_ms", "merge_ms", "rank_ms", "backend_ms"});
  for (const auto& o : outcomes) {
    out += csv_row({
        o.target_id,
        app_of.count(o.target_id) ? app_of[o.target_id] : "",
        std::string(method_name(o.method)),
        std::to_string(o.chosen.widget_id),
        std::to_string(o.chosen_rank),
        join_xpaths(o.chosen),
        o.located ? "1" : "0",
        o.oracle_in_top_k ? "1" : "0",
        o.fallback_used ? "1" : "0",
        o.llm_answer ? std::to_string(o.llm_answer->widget_id) : "",
        o.llm_error,
        std::to_string(o.prompt_tokens),
        std::to_string(o.response_tokens),
        fixed(o.elapsed_ms, 3),
        fixed(o.merge_ms, 3),
        fixed(o.rank_ms, 3),
        fixed(o.backend_ms, 3),
    });
  }
  return out;
}

std::string motivations_csv(std::span<const LocalizationOutcome> phase2) {
  std::string out = csv_row({"pair_id", "motivation_index", "motivation_text", "category"});
  for (const auto& o : phase2) {
    if (!o.llm_answer) continue;
    const auto& m = o.llm_answer->motivations;
    for (std::size_t i = 0; i < m.size(); ++i) {
      out += csv_row({o.target_id, std::to_string(i + 1), m[i], ""});
    }
  }
  return out;
}

std::string summary_markdown(const SummaryInput& input) {
  std::ostringstream md;
  md << "# Localization report\n\n";
  md << "| Approach | Total | Located | Not located | % Located | API Cost ($) | "
        "Time/localization (ms) |\n";
  md << "|---|---|---|---|---|---|---|\n";
  auto row = [&](const std::string& name, const MethodStats& s) {
    md << "| " << name << " | " << s.total << " | " << s.located << " | " << s.not_located << " | "
       << fixed(s.pct_located, 1) << " | " << fixed(s.cost_usd, 2) << " | " << fixed(s.mean_ms, 3)
       << " (STD " << fixed(s.std_ms, 3) << ") |\n";
  };
  if (input.phase1) row("Phase 1: " + input.phase1->label, *input.phase1);
  if (input.phase2) row("Phase 2: " + input.phase2->label + " (phase 1 failures)", *input.phase2);
  if (input.phase3) row("Phase 3: " + input.phase3->label, *input.phase3);
  md << "\nTiming: mean and population standard deviation of wall-clock milliseconds per "
        "localization.\n";

  if (input.comparison) {
    const auto& c = *input.comparison;
    md << "\n## Phase 1 vs phase 3\n\n";
    md << "| Located by both | Only " << c.a.label << " | Only " << c.b.label << " | Neither |\n";
    md << "|---|---|---|---|\n";
    md << "| " << c.venn.both << " | " << c.venn.only_a << " | " << c.venn.only_b << " | "
       << c.venn.neither << " |\n\n";
    md << "Not-located reduction: " << fixed(c.not_located_reduction_pct, 1) << "%\n";
  }

  auto misses = [&](const char* name, const std::optional<MethodStats>& s) {
    if (s) md << "- " << name << ": " << s->oracle_not_in_top_k << " of " << s->total << "\n";
  };
  if (input.phase2 || input.phase3) {
    md << "\n## Oracle outside the top-k candidates\n\n";
    misses("Phase 2", input.phase2);
    misses("Phase 3", input.phase3);
    md << "\n## Model fallbacks\n\n";
    if (input.phase2) md << "- Phase 2: " << input.phase2->fallbacks << "\n";
    if (input.phase3) md << "- Phase 3: " << input.phase3->fallbacks << "\n";
  }
  if (input.phase2) {
    md << "\nPhase 2 produced " << input.phase2_motivations << " motivations.\n";
  }
  if (input.categories) {
    const auto& d = *input.categories;
    md << "\n## Motivation categories\n\n| Category | Count | % |\n|---|---|---|\n";
    const std::array<MotivationCategory, 3> order = {MotivationCategory::kComparisonOperator,
                                                     MotivationCategory::kSemanticUnderstanding,
                                                     MotivationCategory::kContextAwareness};
    for (auto c : order) {
      const auto i = static_cast<std::size_t>(c);
      md << "| " << category_name(c) << " | " << d.counts[i] << " | " << d.percents[i] << " |\n";
    }
    md << "| total | " << d.total << " | |\n";
  }
  return md.str();
}

}  // namespace similo
