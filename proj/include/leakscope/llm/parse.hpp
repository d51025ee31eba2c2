#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "leakscope/corpus.hpp"

namespace leakscope::llm {

struct OracleResponse {
  std::string raw;
  std::string rationale;             // text before the label line, trimmed
  std::optional<std::string> label;  // canonical; nullopt = Unparsed
};

// Finds the last line that starts (case-insensitively, after optional
// whitespace) with the attribute's keyword and takes the remainder as the
// label. Total: never throws; a response with no keyword line is Unparsed
// with rationale = raw.
OracleResponse parse_labeled(std::string_view raw, Attribute attribute);

enum class Verdict { Safe, Unsafe, Unresolved };

std::string_view to_string(Verdict verdict);
std::optional<Verdict> parse_verdict_name(std::string_view name);

// Case-insensitive search for the standalone tokens UNSAFE and SAFE; UNSAFE
// wins if both appear, neither gives Unresolved.
Verdict parse_verdict(std::string_view raw);

}  // namespace leakscope::llm
