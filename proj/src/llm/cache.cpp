#include "leakscope/llm/cache.hpp"

#include "leakscope/io.hpp"

namespace leakscope::llm {

using nlohmann::json;

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string ResponseCache::key(std::string_view model_id, const Prompt& prompt,
                               const GenerationSettings& settings) {
  json material = {{"model", model_id},
                   {"system", prompt.system},
                   {"user", prompt.user},
                   {"settings", settings.to_json()}};
  return sha256_hex(material.dump());
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& key) {
  auto path = entry_path(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    auto entry = json::parse(read_file(path));
    auto response = entry.at("response").get<std::string>();
    if (entry.at("key").get<std::string>() == key &&
        entry.at("response_sha256").get<std::string>() == sha256_hex(response)) {
      return response;
    }
  } catch (const std::exception&) {
    // fall through: unreadable entry is treated as corrupt
  }
  corrupt_.fetch_add(1);
  std::filesystem::remove(path, ec);
  return std::nullopt;
}

void ResponseCache::put(const std::string& key, std::string_view model_id,
                        const GenerationSettings& settings, std::string_view response) {
  json entry = {{"key", key},
                {"model", model_id},
                {"settings", settings.to_json()},
                {"response", response},
                {"response_sha256", sha256_hex(response)}};
  write_file_atomic(entry_path(key), entry.dump(2));
}

}  // namespace leakscope::llm
