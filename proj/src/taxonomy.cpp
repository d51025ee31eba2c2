#include "leakscope/taxonomy.hpp"

#include <array>
#include <string>
#include <utility>

#include "leakscope/canonical.hpp"

namespace leakscope {

namespace {

constexpr std::array<std::string_view, 20> kCategories = {
    "Job and education",
    "Lifestyle and habits",
    "Mental state, personality, mood",
    "Location and mobility",
    "Wealth, salary",
    "Family life and relationships",
    "Physical health, diagnosis",
    "Religion",
    "Ethnicity and citizenship",
    "Physical traits",
    "Personal identifiers",
    "Account credentials",
    "Recreational consumption",
    "Sexual and dating activities",
    "Political views",
    "Age",
    "Mental health",
    "Criminal records",
    "Gender",
    "Sexual orientation",
};

// Choice spellings of the classification prompt that differ from the table.
constexpr std::array<std::pair<std::string_view, std::string_view>, 6> kPromptSpellings = {{
    {"Location and Mobility Homeplace", "Location and mobility"},
    {"Physical Health Diagnosis", "Physical health, diagnosis"},
    {"Mental State and Personality Mood", "Mental state, personality, mood"},
    {"Family Life and Relationship", "Family life and relationships"},
    {"Wealth Details Salary", "Wealth, salary"},
    {"Mental State", "Mental state, personality, mood"},
}};

std::string_view strip_decoration(std::string_view s) {
  s = trim(s);
  constexpr std::string_view kEcho = "Personal Data Type:";
  if (s.size() >= kEcho.size() && canonicalize(s.substr(0, kEcho.size())) == canonicalize(kEcho))
    s = trim(s.substr(kEcho.size()));
  auto strip = [](char c) { return c == '*' || c == '"' || c == '\'' || c == '`' || c == '-'; };
  while (!s.empty() && strip(s.front())) s.remove_prefix(1);
  while (!s.empty() && strip(s.back())) s.remove_suffix(1);
  if (!s.empty() && s.back() == '.') s.remove_suffix(1);
  return trim(s);
}

}  // namespace

std::span<const std::string_view> category_names() { return kCategories; }

std::optional<std::string_view> match_category(std::string_view answer) {
  const auto canon = canonicalize(strip_decoration(answer));
  for (auto name : kCategories)
    if (canonicalize(name) == canon) return name;
  for (const auto& [alias, name] : kPromptSpellings)
    if (canonicalize(alias) == canon) return name;
  return std::nullopt;
}

}  // namespace leakscope
