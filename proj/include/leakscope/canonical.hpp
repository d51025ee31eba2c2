#pragma once

#include <string>
#include <string_view>

namespace leakscope {

// Label canonical form: surrounding whitespace trimmed, ASCII case folded,
// en/em dashes mapped to '-', internal whitespace runs collapsed to one space.
// Idempotent.
std::string canonicalize(std::string_view label);

// canonicalize() followed by the bundled country alias table
// ("usa" -> "united states", "uk" -> "united kingdom", ...).
std::string canonical_country(std::string_view label);

// Removes leading/trailing ASCII whitespace.
std::string_view trim(std::string_view s);

}  // namespace leakscope
