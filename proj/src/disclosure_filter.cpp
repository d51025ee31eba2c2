#include "leakscope/disclosure_filter.hpp"

#include <algorithm>

#include "leakscope/errors.hpp"
#include "leakscope/llm/concurrency.hpp"
#include "leakscope/llm/prompts.hpp"
#include "leakscope/taxonomy.hpp"

namespace leakscope {

std::vector<EntityFlag> flag_entities(const MessageStream& stream, const EntityFlagger& flagger,
                                      const EnglishGate& gate) {
  std::vector<EntityFlag> flags;
  for (const auto& message : stream.messages) {
    if (!gate.is_english(message.text)) continue;
    std::vector<EntityMatch> matches;
    try {
      matches = flagger.find(message.text);
    } catch (const std::exception& e) {
      throw FlaggerError("entity flagger failed on message " + std::to_string(message.index) +
                         ": " + e.what());
    }
    std::stable_sort(matches.begin(), matches.end(),
                     [](const EntityMatch& a, const EntityMatch& b) { return a.offset < b.offset; });
    for (auto& m : matches) flags.push_back({message.index, m.kind, std::move(m.surface)});
  }
  std::stable_sort(flags.begin(), flags.end(), [](const EntityFlag& a, const EntityFlag& b) {
    return a.message_index < b.message_index;
  });
  return flags;
}

std::vector<SafetyVerdict> classify_safety(const MessageStream& stream, llm::LlmGateway& gateway) {
  std::vector<SafetyVerdict> out(stream.size());
  llm::parallel_for(stream.size(), gateway.concurrency(), [&](std::size_t i) {
    const auto& message = stream.messages[i];
    auto& slot = out[i];
    slot.message_index = message.index;
    std::vector<std::string> payload{message.text};
    try {
      slot.raw = gateway.complete(llm::render(llm::TemplateId::Safety, std::nullopt, payload));
      slot.verdict = llm::parse_verdict(slot.raw);
    } catch (const OracleError& e) {
      slot.verdict = llm::Verdict::Unresolved;
      slot.error = e.what();
    }
  });
  return out;
}

CategoryResult classify_category(const MessageStream& stream,
                                 const std::vector<SafetyVerdict>& verdicts,
                                 llm::LlmGateway& gateway) {
  std::vector<const Message*> flagged;
  for (const auto& v : verdicts) {
    if (v.verdict != llm::Verdict::Unsafe) continue;
    auto it = std::find_if(stream.messages.begin(), stream.messages.end(),
                           [&](const Message& m) { return m.index == v.message_index; });
    if (it == stream.messages.end())
      throw Error("verdict refers to missing message " + std::to_string(v.message_index));
    flagged.push_back(&*it);
  }

  struct Slot {
    std::optional<std::string> raw;
    std::optional<std::string_view> category;
  };
  std::vector<Slot> slots(flagged.size());
  llm::parallel_for(flagged.size(), gateway.concurrency(), [&](std::size_t i) {
    std::vector<std::string> payload{flagged[i]->text};
    try {
      auto raw = gateway.complete(llm::render(llm::TemplateId::Taxonomy, std::nullopt, payload));
      slots[i].category = match_category(raw);
      slots[i].raw = std::move(raw);
    } catch (const OracleError&) {
    }
  });

  CategoryResult result;
  for (std::size_t i = 0; i < flagged.size(); ++i) {
    auto index = flagged[i]->index;
    if (!slots[i].raw) result.failed.push_back(index);
    else if (!slots[i].category) result.unknown.push_back({index, *slots[i].raw});
    else result.labels.push_back({index, std::string(*slots[i].category)});
  }
  return result;
}

}  // namespace leakscope
