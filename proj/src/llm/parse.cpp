#include "leakscope/llm/parse.hpp"

#include <cctype>
#include <vector>

#include "leakscope/canonical.hpp"
#include "leakscope/llm/prompts.hpp"

namespace leakscope::llm {

namespace {

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (lower(s[i]) != lower(prefix[i])) return false;
  return true;
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool contains_token_ci(std::string_view text, std::string_view token) {
  for (std::size_t i = 0; i + token.size() <= text.size(); ++i) {
    if (!starts_with_ci(text.substr(i), token)) continue;
    bool left_ok = i == 0 || !is_word_char(text[i - 1]);
    bool right_ok = i + token.size() == text.size() || !is_word_char(text[i + token.size()]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

// Strips markdown emphasis, quotes and a trailing period around a label.
std::string_view clean_label(std::string_view s) {
  s = trim(s);
  auto strip = [](char c) { return c == '*' || c == '_' || c == '"' || c == '\'' || c == '`'; };
  while (!s.empty() && strip(s.front())) s.remove_prefix(1);
  while (!s.empty() && (strip(s.back()) || s.back() == '.')) s.remove_suffix(1);
  return trim(s);
}

}  // namespace

OracleResponse parse_labeled(std::string_view raw, Attribute attribute) {
  OracleResponse out{std::string(raw), {}, std::nullopt};
  const std::string_view keyword = label_keyword(attribute);

  std::size_t line_start = 0;
  std::optional<std::size_t> match_start;
  std::string_view match_rest;
  while (line_start <= raw.size()) {
    auto nl = raw.find('\n', line_start);
    auto line = raw.substr(line_start, nl == std::string_view::npos ? std::string_view::npos
                                                                    : nl - line_start);
    auto body = line;
    while (!body.empty() && (body.front() == ' ' || body.front() == '\t')) body.remove_prefix(1);
    if (starts_with_ci(body, keyword)) {
      match_start = line_start;
      match_rest = body.substr(keyword.size());
    }
    if (nl == std::string_view::npos) break;
    line_start = nl + 1;
  }

  if (!match_start) {
    out.rationale = std::string(raw);
    return out;
  }
  out.rationale = std::string(trim(raw.substr(0, *match_start)));
  auto label = clean_label(match_rest);
  if (!label.empty()) out.label = canonicalize(label);
  return out;
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Safe: return "SAFE";
    case Verdict::Unsafe: return "UNSAFE";
    case Verdict::Unresolved: return "UNRESOLVED";
  }
  return "UNRESOLVED";
}

std::optional<Verdict> parse_verdict_name(std::string_view name) {
  if (name == "SAFE") return Verdict::Safe;
  if (name == "UNSAFE") return Verdict::Unsafe;
  if (name == "UNRESOLVED") return Verdict::Unresolved;
  return std::nullopt;
}

Verdict parse_verdict(std::string_view raw) {
  if (contains_token_ci(raw, "UNSAFE")) return Verdict::Unsafe;
  if (contains_token_ci(raw, "SAFE")) return Verdict::Safe;
  return Verdict::Unresolved;
}

}  // namespace leakscope::llm
