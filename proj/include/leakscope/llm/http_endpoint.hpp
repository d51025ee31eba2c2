#pragma once

#include <chrono>
#include <string>

#include "leakscope/llm/endpoint.hpp"

namespace leakscope::llm {

struct HttpEndpointOptions {
  // Base URL such as "http://localhost:8000/v1"; "/chat/completions" is
  // appended unless already present.
  std::string base_url;
  std::string model;
  std::string api_key;  // sent as a Bearer token when non-empty
  std::chrono::seconds timeout{120};
};

// OpenAI-style chat-completion client. The template text goes out as the
// system message and the payload block as the user message; a prompt with an
// inline payload is sent as a single user message.
//
// Transport errors, 429 and 5xx raise EndpointFailure (retryable); other
// non-200 statuses and undecodable bodies raise EndpointFailure as well, with
// the status in the message.
class HttpChatEndpoint final : public LlmEndpoint {
 public:
  explicit HttpChatEndpoint(HttpEndpointOptions options);

  std::string complete(const Prompt& prompt, const GenerationSettings& settings) override;
  std::string model_id() const override { return options_.model; }

  static nlohmann::json request_body(std::string_view model, const Prompt& prompt,
                                     const GenerationSettings& settings);
  static std::string response_text(std::string_view body);

 private:
  HttpEndpointOptions options_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace leakscope::llm
