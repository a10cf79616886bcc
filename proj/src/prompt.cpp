#include "similo/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>

#include "similo/error.hpp"

namespace similo {

namespace {

constexpr std::string_view kHeader =
    "Given the following candidate web elements (|| means that an attribute can have multiple "
    "values):";
constexpr std::string_view kFindIdOnly = "find the one that is most similar to the element:";
constexpr std::string_view kAnswerFormat =
    "Answer with the widget_id number(digits) only, no explanation or text characters";
constexpr std::string_view kFindWithMotivations =
    "find the one that is most similar (answer with the widget_id of the most similar and "
    "motivate why using a list) to the element:";
constexpr std::string_view kExampleIntro = "Example:";
constexpr std::string_view kExampleAnswerIntro = "Example answer:";
constexpr std::string_view kTaskIntro = "Task:";
constexpr std::string_view kValueSeparator = " || ";

// Prompt key order. IdXPath is scored but never shown to the model.
constexpr std::array<PropertyKey, 13> kPromptKeys = {
    PropertyKey::kTag,      PropertyKey::kVisibleText, PropertyKey::kClass,
    PropertyKey::kId,       PropertyKey::kName,        PropertyKey::kHRef,
    PropertyKey::kAlt,      PropertyKey::kLocation,    PropertyKey::kArea,
    PropertyKey::kShape,    PropertyKey::kIsButton,    PropertyKey::kXPath,
    PropertyKey::kNeighborText,
};

void append_escaped(std::string& out, std::string_view value) {
  for (char c : value) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
}

std::string join_values(const ValueSet& values) {
  std::string joined;
  bool first = true;
  for (const auto& v : values) {
    if (!first) joined += kValueSeparator;
    joined += v;
    first = false;
  }
  return joined;
}

class LineParser {
 public:
  explicit LineParser(std::string_view text) : text_(text) {}

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\r' || text_[pos_] == '\n')) {
      ++pos_;
    }
  }
  bool at_end() const { return pos_ >= text_.size(); }
  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }
  std::string key() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }
  std::string quoted() {
    expect('"');
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("dangling escape");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 'r': c = '\r'; break;
          case 't': c = '\t'; break;
          default: c = e;
        }
      }
      out.push_back(c);
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kParseError,
                what + " at column " + std::to_string(pos_ + 1) + " in element line");
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

void append_line(std::string& out, std::string_view line) {
  out += line;
  out.push_back('\n');
}

// Renders the bare template; `out` receives full lines.
void render_task(std::string& out, const VisualElement& desired,
                 std::span<const VisualElement* const> candidates, PromptTemplate kind,
                 std::vector<int>* ids) {
  append_line(out, kHeader);
  for (const auto* c : candidates) {
    append_line(out, serialize_element(*c, true));
    if (ids) ids->push_back(c->widget_id);
  }
  append_line(out, "");
  append_line(out, kind == PromptTemplate::kIdOnly ? kFindIdOnly : kFindWithMotivations);
  append_line(out, serialize_element(desired, false));
  if (kind == PromptTemplate::kIdOnly) append_line(out, kAnswerFormat);
}

VisualElement example_element(std::string_view line) { return parse_element(line); }

std::optional<std::int64_t> to_int(std::string_view digits) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return value;
}

struct IntegerToken {
  std::size_t pos;
  std::string_view digits;
};

std::vector<IntegerToken> integer_tokens(std::string_view raw) {
  std::vector<IntegerToken> tokens;
  for (std::size_t i = 0; i < raw.size();) {
    if (raw[i] >= '0' && raw[i] <= '9') {
      const std::size_t start = i;
      while (i < raw.size() && raw[i] >= '0' && raw[i] <= '9') ++i;
      tokens.push_back({start, raw.substr(start, i - start)});
    } else {
      ++i;
    }
  }
  return tokens;
}

// Lines shaped like "3. text" after `from`.
std::vector<std::string> numbered_items(std::string_view raw, std::size_t from) {
  std::vector<std::string> items;
  // The line holding the answered id is not a list item.
  std::size_t line_start = raw.find('\n', from);
  while (line_start != std::string_view::npos && line_start < raw.size()) {
    ++line_start;
    const std::size_t line_end = raw.find('\n', line_start);
    std::string_view line = raw.substr(
        line_start, line_end == std::string_view::npos ? std::string_view::npos : line_end - line_start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t digits = i;
    while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
    if (i > digits && i < line.size() && line[i] == '.') {
      ++i;
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      items.emplace_back(line.substr(i));
    }
    line_start = line_end;
  }
  return items;
}

}  // namespace

PromptMode PromptMode::one_shot(PromptTemplate kind) { return {kind, default_prompt_example()}; }

const PromptExample& default_prompt_example() {
  static const PromptExample example = [] {
    PromptExample ex;
    ex.candidates = {
        example_element(
            R"({widget_id:"4",tag:"button",text:"Sign in",id:"login-submit",location:"610,40",area:"3200",shape:"250",is_button:"yes",xpath:"/html/body/header/div/button",neighbor_text:"home products pricing sign in create account"})"),
        example_element(
            R"({widget_id:"7",tag:"a",text:"Create account",href:"https://example.com/register",location:"700,40",area:"4800",shape:"375",is_button:"no",xpath:"/html/body/header/div/a[2]",neighbor_text:"pricing sign in create account"})"),
        example_element(
            R"({widget_id:"2",tag:"a",text:"Pricing",href:"https://example.com/pricing",location:"480,40",area:"2400",shape:"187",is_button:"no",xpath:"/html/body/header/nav/a[3]",neighbor_text:"home products pricing sign in"})"),
    };
    ex.desired = example_element(
        R"({tag:"input || div",text:"Log in",class:"btn-login",id:"login-btn",location:"598,36",area:"3000",shape:"234",is_button:"yes",xpath:"/html/body/div[1]/div/form/input",neighbor_text:"home products pricing log in register"})");
    ex.id_only_answer = "4";
    ex.motivated_answer =
        "The most similar element is the one with widget_id \"4\". The reasons for this choice "
        "are:\n"
        "\n"
        "1. Both elements are buttons according to the 'is_button' attribute.\n"
        "2. The text \"Sign in\" has the same meaning as \"Log in\".\n"
        "3. The 'location' attributes are close, so both elements sit at the same place in the "
        "header.";
    return ex;
  }();
  return example;
}

int estimate_tokens(std::string_view text) {
  return static_cast<int>((text.size() + 3) / 4);
}

std::string serialize_element(const VisualElement& element, bool include_widget_id) {
  std::string out = "{";
  bool first = true;
  auto add = [&](std::string_view key, std::string_view value) {
    if (!first) out.push_back(',');
    first = false;
    out += key;
    out += ":\"";
    append_escaped(out, value);
    out.push_back('"');
  };
  if (include_widget_id) add("widget_id", std::to_string(element.widget_id));
  for (auto key : kPromptKeys) {
    const auto& values = element.at(key);
    if (!values.empty()) add(property_name(key), join_values(values));
  }
  out.push_back('}');
  return out;
}

VisualElement parse_element(std::string_view line) {
  LineParser p(line);
  VisualElement element;
  p.expect('{');
  if (!p.consume('}')) {
    do {
      const std::string key = p.key();
      p.expect(':');
      const std::string value = p.quoted();
      if (key == "widget_id") {
        const auto id = to_int(value);
        if (!id || *id < 0 || *id > std::numeric_limits<int>::max()) {
          p.fail("widget_id is not a non-negative integer");
        }
        element.widget_id = static_cast<int>(*id);
        continue;
      }
      const auto prop = property_from_name(key);
      if (!prop) p.fail("unknown key \"" + key + "\"");
      auto& set = element.at(*prop);
      std::size_t start = 0;
      while (true) {
        const std::size_t sep = value.find(kValueSeparator, start);
        set.insert(value.substr(start, sep == std::string::npos ? std::string::npos : sep - start));
        if (sep == std::string::npos) break;
        start = sep + kValueSeparator.size();
      }
    } while (p.consume(','));
    p.expect('}');
  }
  p.skip_space();
  if (!p.at_end()) p.fail("trailing characters");
  element.member_xpaths = element.at(PropertyKey::kXPath);
  return element;
}

PromptBundle build_prompt(const VisualElement& desired, std::span<const VisualElement> candidates,
                          const PromptMode& mode, int max_prompt_tokens) {
  PromptBundle bundle;
  std::string& out = bundle.rendered_text;
  if (mode.example) {
    const auto& ex = *mode.example;
    std::vector<const VisualElement*> ex_candidates;
    for (const auto& c : ex.candidates) ex_candidates.push_back(&c);
    append_line(out, kExampleIntro);
    render_task(out, ex.desired, ex_candidates, mode.kind, nullptr);
    append_line(out, kExampleAnswerIntro);
    append_line(out, mode.kind == PromptTemplate::kIdOnly ? ex.id_only_answer : ex.motivated_answer);
    append_line(out, "");
    append_line(out, kTaskIntro);
  }
  std::vector<const VisualElement*> ptrs;
  ptrs.reserve(candidates.size());
  for (const auto& c : candidates) ptrs.push_back(&c);
  render_task(out, desired, ptrs, mode.kind, &bundle.candidate_ids);

  bundle.estimated_tokens = estimate_tokens(out);
  if (bundle.estimated_tokens > max_prompt_tokens) {
    throw Error(ErrorCode::kPromptTooLarge,
                "estimated " + std::to_string(bundle.estimated_tokens) + " tokens exceeds " +
                    std::to_string(max_prompt_tokens));
  }
  return bundle;
}

PromptBundle build_prompt(const TargetSpec& target, std::span<const ScoredCandidate> top,
                          const PromptMode& mode, int max_prompt_tokens) {
  std::vector<VisualElement> elements;
  elements.reserve(top.size());
  for (const auto& c : top) elements.push_back(c.element);
  return build_prompt(target.desired, elements, mode, max_prompt_tokens);
}

RerankAnswer parse_answer(std::string_view raw, const PromptBundle& bundle, PromptTemplate kind) {
  const auto tokens = integer_tokens(raw);
  if (tokens.empty()) {
    throw Error(ErrorCode::kUnparsableAnswer, "no widget id in response");
  }
  auto known = [&](std::string_view digits) -> std::optional<int> {
    const auto value = to_int(digits);
    if (!value) return std::nullopt;
    const auto it = std::find(bundle.candidate_ids.begin(), bundle.candidate_ids.end(), *value);
    if (it == bundle.candidate_ids.end()) return std::nullopt;
    return *it;
  };

  RerankAnswer answer;
  answer.raw_response = std::string(raw);
  if (kind == PromptTemplate::kIdOnly) {
    const auto id = known(tokens.front().digits);
    if (!id) {
      throw Error(ErrorCode::kUnknownWidgetId,
                  "widget id " + std::string(tokens.front().digits) + " is not a candidate");
    }
    answer.widget_id = *id;
    return answer;
  }
  for (const auto& token : tokens) {
    if (const auto id = known(token.digits)) {
      answer.widget_id = *id;
      answer.motivations = numbered_items(raw, token.pos);
      return answer;
    }
  }
  throw Error(ErrorCode::kUnknownWidgetId,
              "none of the integers in the response is a candidate widget id");
}

}  // namespace similo
