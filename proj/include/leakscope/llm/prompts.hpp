#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "leakscope/corpus.hpp"

namespace leakscope::llm {

enum class TemplateId {
  Safety,
  Taxonomy,
  Country,
  Gender,
  Age,
  ReligionX,
  IncomeX,
  EducationX,
  VotingX,
  AgeX,
  GenderX,
};

inline constexpr TemplateId kAllTemplates[] = {
    TemplateId::Safety,   TemplateId::Taxonomy,  TemplateId::Country,
    TemplateId::Gender,   TemplateId::Age,       TemplateId::ReligionX,
    TemplateId::IncomeX,  TemplateId::EducationX, TemplateId::VotingX,
    TemplateId::AgeX,     TemplateId::GenderX};

std::string_view template_name(TemplateId id);  // "safety", "age_x", ...
std::optional<TemplateId> parse_template(std::string_view name);

// True for the cross-platform (_x) templates, which carry a data-source slot.
bool has_source_slot(TemplateId id);

inline constexpr std::string_view kGoogleSearchPhrase = "google search history";
inline constexpr std::string_view kYoutubeSearchPhrase = "YouTube search history";
inline constexpr std::string_view kYoutubeWatchPhrase = "YouTube watch history";
inline constexpr std::string_view kConversationPhrase = "conversation history";

std::string_view source_phrase(StreamKind kind);
bool is_allowed_source_phrase(std::string_view phrase);

// Line placed between the instructions and the user payload.
inline constexpr std::string_view kPayloadDelimiter = "\n\n---\n";
inline constexpr std::string_view kPayloadLinePrefix = "USER: ";

struct Prompt {
  std::string system;  // template text
  std::string user;    // payload block; empty when the payload is inline or absent

  // The exact prompt string: system, then the delimiter and payload if any.
  std::string text() const;
};

// Renders a template. `_x` templates require an allowed `source_phrase`
// (MissingSlot otherwise); other templates ignore it. With an empty payload
// the result is the template text byte-for-byte. The taxonomy template
// substitutes the payload into its inline "{text}" slot instead of
// appending a block.
Prompt render(TemplateId id, std::optional<std::string_view> source_phrase,
              std::span<const std::string> payload);

// Template used to query `attribute` on a `kind` stream; nullopt when the
// combination has no prompt (Country outside ChatAssistant).
std::optional<TemplateId> template_for(Attribute attribute, StreamKind kind);

// "Country:", "Gender:", "Bracket:", ...
std::string_view label_keyword(Attribute attribute);

}  // namespace leakscope::llm
