#include "leakscope/llm/http_endpoint.hpp"

#include <httplib.h>

namespace leakscope::llm {

using nlohmann::json;

HttpChatEndpoint::HttpChatEndpoint(HttpEndpointOptions options) : options_(std::move(options)) {
  const std::string& url = options_.base_url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error("endpoint URL needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  if (!path_.ends_with("/chat/completions")) path_ += "/chat/completions";
}

json HttpChatEndpoint::request_body(std::string_view model, const Prompt& prompt,
                                    const GenerationSettings& settings) {
  json messages = json::array();
  if (prompt.user.empty()) {
    messages.push_back({{"role", "user"}, {"content", prompt.system}});
  } else {
    messages.push_back({{"role", "system"}, {"content", prompt.system}});
    messages.push_back({{"role", "user"}, {"content", prompt.user}});
  }
  return {{"model", model},
          {"messages", messages},
          {"temperature", settings.temperature},
          {"max_tokens", settings.max_tokens}};
}

std::string HttpChatEndpoint::response_text(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw EndpointFailure(std::string("undecodable completion body: ") + e.what());
  }
  auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty())
    throw EndpointFailure("completion body has no choices");
  const auto& first = (*choices)[0];
  if (auto msg = first.find("message"); msg != first.end() && msg->contains("content") &&
                                        (*msg)["content"].is_string())
    return (*msg)["content"].get<std::string>();
  if (auto text = first.find("text"); text != first.end() && text->is_string())
    return text->get<std::string>();
  throw EndpointFailure("first choice carries no text");
}

std::string HttpChatEndpoint::complete(const Prompt& prompt, const GenerationSettings& settings) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  client.set_write_timeout(options_.timeout);
  httplib::Headers headers;
  if (!options_.api_key.empty())
    headers.emplace("Authorization", "Bearer " + options_.api_key);

  auto body = request_body(options_.model, prompt, settings).dump();
  auto result = client.Post(path_, headers, body, "application/json");
  if (!result)
    throw EndpointFailure("transport error: " + httplib::to_string(result.error()));
  if (result->status != 200)
    throw EndpointFailure("HTTP status " + std::to_string(result->status));
  return response_text(result->body);
}

}  // namespace leakscope::llm
