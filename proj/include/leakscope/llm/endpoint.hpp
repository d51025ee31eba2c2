#pragma once

#include <atomic>
#include <cstddef>
#include <string>

#include <json.hpp>

#include "leakscope/errors.hpp"
#include "leakscope/llm/prompts.hpp"

namespace leakscope::llm {

// Decoding parameters sent with every request. They are part of the cache key.
struct GenerationSettings {
  double temperature = 0.0;
  int max_tokens = 512;

  nlohmann::json to_json() const {
    return {{"temperature", temperature}, {"max_tokens", max_tokens}};
  }
};

// Thrown by an endpoint for a failed attempt. The gateway retries these.
class EndpointFailure : public Error {
 public:
  using Error::Error;
};

// A chat-completion backend: rendered prompt in, raw text out.
// Implementations must tolerate concurrent calls.
class LlmEndpoint {
 public:
  virtual ~LlmEndpoint() = default;
  virtual std::string complete(const Prompt& prompt, const GenerationSettings& settings) = 0;
  virtual std::string model_id() const = 0;
};

}  // namespace leakscope::llm
