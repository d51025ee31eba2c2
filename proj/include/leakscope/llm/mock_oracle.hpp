#pragma once

#include <atomic>
#include <string>
#include <string_view>

#include "leakscope/llm/endpoint.hpp"

namespace leakscope::llm {

// Deterministic stand-in for a hosted model; the response is a pure function
// of the prompt text.
//
// Safety prompts: the message is matched against the template's own examples
// (exact, canonicalized); otherwise it is UNSAFE iff it contains one of the
// template's UNSAFE example sentences.
//
// Taxonomy prompts: answers NAME for a "((category:NAME))" token in the
// message, otherwise a category derived from the UNSAFE example it contains.
//
// Demographic prompts: answers VALUE for the last "((cue:ATTR=VALUE))" token
// whose ATTR names the prompt's attribute, otherwise a fixed default.
//
// "((mock:error))" in the payload makes every attempt fail;
// "((mock:garble))" yields a response with no parseable label.
class MockOracle final : public LlmEndpoint {
 public:
  std::string complete(const Prompt& prompt, const GenerationSettings& settings) override;
  std::string model_id() const override { return "mock-oracle-v1"; }

  static std::string respond(std::string_view prompt_text);

  // Label the mock gives when the payload carries no cue for `attribute`.
  static std::string_view default_label(Attribute attribute);

  std::size_t calls() const { return calls_.load(); }

 private:
  std::atomic<std::size_t> calls_{0};
};

// The cue token a synthetic message carries to plant `value` for `attribute`.
std::string cue_token(Attribute attribute, std::string_view value);
std::string category_token(std::string_view category);

}  // namespace leakscope::llm
