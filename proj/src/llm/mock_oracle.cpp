#include "leakscope/llm/mock_oracle.hpp"

#include <optional>
#include <utility>
#include <vector>

#include "leakscope/canonical.hpp"
#include "leakscope/llm/parse.hpp"

namespace leakscope::llm {

namespace {

constexpr std::string_view kErrorDirective = "((mock:error))";
constexpr std::string_view kGarbleDirective = "((mock:garble))";

struct SeedExample {
  std::string input;
  Verdict verdict;
};

// Pulls the `Input: "..." -> Output: X` lines out of the safety template.
const std::vector<SeedExample>& safety_examples() {
  static const auto examples = [] {
    std::vector<SeedExample> out;
    const std::string body = render(TemplateId::Safety, std::nullopt, {}).system;
    std::string_view rest = body;
    constexpr std::string_view kIn = "Input: \"";
    constexpr std::string_view kArrow = "\" -> Output: ";
    while (true) {
      auto start = rest.find(kIn);
      if (start == std::string_view::npos) break;
      rest.remove_prefix(start + kIn.size());
      auto arrow = rest.find(kArrow);
      if (arrow == std::string_view::npos) break;
      std::string input(rest.substr(0, arrow));
      rest.remove_prefix(arrow + kArrow.size());
      auto eol = rest.find('\n');
      auto label = rest.substr(0, eol);
      out.push_back({std::move(input), parse_verdict(label)});
      if (eol == std::string_view::npos) break;
    }
    return out;
  }();
  return examples;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

// Payload messages with their "USER: " prefixes removed.
std::string extract_payload(std::string_view prompt) {
  auto pos = prompt.find(kPayloadDelimiter);
  if (pos == std::string_view::npos) return {};
  std::string_view block = prompt.substr(pos + kPayloadDelimiter.size());
  std::string out;
  while (!block.empty()) {
    auto nl = block.find('\n');
    auto line = block.substr(0, nl);
    block = nl == std::string_view::npos ? std::string_view{} : block.substr(nl + 1);
    if (line.starts_with(kPayloadLinePrefix)) line.remove_prefix(kPayloadLinePrefix.size());
    if (!out.empty()) out += '\n';
    out += line;
  }
  return out;
}

std::string extract_taxonomy_input(std::string_view prompt) {
  constexpr std::string_view kInput = "\nInput: ";
  constexpr std::string_view kTail = "\nPersonal Data Type:";
  auto start = prompt.rfind(kInput);
  auto end = prompt.rfind(kTail);
  if (start == std::string_view::npos || end == std::string_view::npos || end < start) return {};
  start += kInput.size();
  return std::string(prompt.substr(start, end - start));
}

// Value of the last ((name:ATTR=VALUE))-style token whose ATTR matches.
std::optional<std::string> last_token(std::string_view text, std::string_view name,
                                      std::optional<std::string_view> attr) {
  const std::string open = "((" + std::string(name) + ":";
  std::optional<std::string> found;
  std::size_t pos = 0;
  while ((pos = text.find(open, pos)) != std::string_view::npos) {
    auto body_start = pos + open.size();
    auto close = text.find("))", body_start);
    if (close == std::string_view::npos) break;
    auto body = text.substr(body_start, close - body_start);
    pos = close + 2;
    if (!attr) {
      found = std::string(trim(body));
      continue;
    }
    auto eq = body.find('=');
    if (eq == std::string_view::npos) continue;
    if (canonicalize(body.substr(0, eq)) == canonicalize(*attr))
      found = std::string(trim(body.substr(eq + 1)));
  }
  return found;
}

std::string respond_safety(const std::string& message) {
  const auto canon = canonicalize(message);
  for (const auto& ex : safety_examples())
    if (canonicalize(ex.input) == canon) return std::string(to_string(ex.verdict));
  const auto lowered = lower_ascii(message);
  for (const auto& ex : safety_examples())
    if (ex.verdict == Verdict::Unsafe && lowered.find(lower_ascii(ex.input)) != std::string::npos)
      return "UNSAFE";
  return "SAFE";
}

std::string respond_taxonomy(const std::string& message) {
  if (auto cat = last_token(message, "category", std::nullopt)) return *cat;
  const auto lowered = lower_ascii(message);
  if (lowered.find("single mom") != std::string::npos) return "Family Life and Relationship";
  if (lowered.find("year old") != std::string::npos) return "Age";
  return "Personal Identifiers";
}

std::optional<Attribute> attribute_of(std::string_view prompt) {
  for (auto attribute : kAllAttributes) {
    std::string marker = "exactly the word \"" + std::string(label_keyword(attribute)) + "\"";
    if (prompt.find(marker) != std::string_view::npos) return attribute;
  }
  return std::nullopt;
}

}  // namespace

std::string_view MockOracle::default_label(Attribute attribute) {
  switch (attribute) {
    case Attribute::Age: return "45+";
    case Attribute::Gender: return "Female";
    case Attribute::Country: return "United States";
    case Attribute::Religion: return "other";
    case Attribute::Education: return "class_9_10";
    case Attribute::Income: return "less_than_20k";
    case Attribute::Voting: return "another_party";
  }
  return "";
}

std::string MockOracle::respond(std::string_view prompt) {
  const std::string safety_head = "You are a Privacy & Demographic Filter.";
  const std::string taxonomy_head = "You are a classifier that assigns a \"Personal Data Type\"";

  std::string payload;
  enum class Mode { Safety, Taxonomy, Demographic, Unknown } mode = Mode::Unknown;
  std::optional<Attribute> attribute;
  if (prompt.starts_with(safety_head)) {
    mode = Mode::Safety;
    payload = extract_payload(prompt);
  } else if (prompt.starts_with(taxonomy_head)) {
    mode = Mode::Taxonomy;
    payload = extract_taxonomy_input(prompt);
  } else if ((attribute = attribute_of(prompt))) {
    mode = Mode::Demographic;
    payload = extract_payload(prompt);
  }

  if (payload.find(kErrorDirective) != std::string::npos)
    throw EndpointFailure("mock oracle: simulated endpoint failure");
  if (payload.find(kGarbleDirective) != std::string::npos) return "I cannot help with that.";

  switch (mode) {
    case Mode::Safety: return respond_safety(payload);
    case Mode::Taxonomy: return respond_taxonomy(payload);
    case Mode::Demographic: {
      auto keyword = label_keyword(*attribute);
      if (auto value = last_token(payload, "cue", to_string(*attribute)))
        return "Reasoning: cue.\n" + std::string(keyword) + " " + *value;
      return "Reasoning: no cue.\n" + std::string(keyword) + " " +
             std::string(default_label(*attribute));
    }
    case Mode::Unknown: break;
  }
  return "I do not recognise this task.";
}

std::string MockOracle::complete(const Prompt& prompt, const GenerationSettings&) {
  calls_.fetch_add(1);
  return respond(prompt.text());
}

std::string cue_token(Attribute attribute, std::string_view value) {
  return "((cue:" + canonicalize(to_string(attribute)) + "=" + std::string(value) + "))";
}

std::string category_token(std::string_view category) {
  return "((category:" + std::string(category) + "))";
}

}  // namespace leakscope::llm
