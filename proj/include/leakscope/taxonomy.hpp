#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace leakscope {

// The twenty personal-information categories, in their table spelling and
// table order ("Job and education", ..., "Sexual orientation").
std::span<const std::string_view> category_names();

// Canonicalized exact match of a model answer against the table spellings
// and the classification prompt's choice spellings. Returns the table
// spelling, or nullopt for anything outside the closed set.
std::optional<std::string_view> match_category(std::string_view answer);

}  // namespace leakscope
