#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "leakscope/corpus.hpp"
#include "leakscope/entity_flagger.hpp"
#include "leakscope/llm/gateway.hpp"
#include "leakscope/llm/parse.hpp"

namespace leakscope {

struct EntityFlag {
  std::size_t message_index = 0;
  EntityKind kind = EntityKind::GPE;
  std::string surface;

  bool operator==(const EntityFlag&) const = default;
};

// Flags every entity in messages that pass the English gate. Sorted by
// message index, then by position within the message.
std::vector<EntityFlag> flag_entities(const MessageStream& stream, const EntityFlagger& flagger,
                                      const EnglishGate& gate = EnglishGate{});

struct SafetyVerdict {
  std::size_t message_index = 0;
  llm::Verdict verdict = llm::Verdict::Unresolved;
  std::string raw;
  std::optional<std::string> error;  // set when the oracle gave up
};

// One verdict per message, in message order. Oracle exhaustion yields an
// Unresolved verdict carrying the error instead of throwing.
std::vector<SafetyVerdict> classify_safety(const MessageStream& stream, llm::LlmGateway& gateway);

struct CategoryLabel {
  std::size_t message_index = 0;
  std::string category;
};

struct UnknownCategory {
  std::size_t message_index = 0;
  std::string raw;
};

struct CategoryResult {
  std::vector<CategoryLabel> labels;
  std::vector<UnknownCategory> unknown;     // answers outside the twenty names
  std::vector<std::size_t> failed;          // oracle exhausted
};

// Classifies the messages whose verdict is UNSAFE; every other message is
// left alone. `verdicts` must come from classify_safety on the same stream.
CategoryResult classify_category(const MessageStream& stream,
                                 const std::vector<SafetyVerdict>& verdicts,
                                 llm::LlmGateway& gateway);

}  // namespace leakscope
