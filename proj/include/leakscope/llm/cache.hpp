#pragma once

#include <atomic>
#include <filesystem>
#include <optional>
#include <string>

#include "leakscope/llm/endpoint.hpp"

namespace leakscope::llm {

// Content-addressed response store: <dir>/<first two hex>/<sha256>.json.
// Each entry records its own key and a checksum of the response; an entry
// failing either check is deleted and reported as a miss.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  static std::string key(std::string_view model_id, const Prompt& prompt,
                         const GenerationSettings& settings);

  std::optional<std::string> get(const std::string& key);
  void put(const std::string& key, std::string_view model_id, const GenerationSettings& settings,
           std::string_view response);

  std::size_t corrupt_entries() const { return corrupt_.load(); }
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path entry_path(const std::string& key) const;

 private:
  std::filesystem::path dir_;
  std::atomic<std::size_t> corrupt_{0};
};

}  // namespace leakscope::llm
