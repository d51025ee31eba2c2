#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "leakscope/corpus.hpp"
#include "leakscope/io.hpp"
#include "leakscope/llm/endpoint.hpp"

namespace test {

inline std::filesystem::path fixture(const std::string& rel) {
  return std::filesystem::path(LEAKSCOPE_FIXTURE_DIR) / rel;
}

inline std::string read_fixture(const std::string& rel) { return leakscope::read_file(fixture(rel)); }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("leakscope-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// Endpoint answering from a callback, counting calls.
class ScriptedEndpoint final : public leakscope::llm::LlmEndpoint {
 public:
  using Fn = std::function<std::string(const leakscope::llm::Prompt&)>;
  explicit ScriptedEndpoint(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(const leakscope::llm::Prompt& prompt,
                       const leakscope::llm::GenerationSettings&) override {
    calls_.fetch_add(1);
    return fn_(prompt);
  }
  std::string model_id() const override { return "scripted"; }
  std::size_t calls() const { return calls_.load(); }

 private:
  Fn fn_;
  std::atomic<std::size_t> calls_{0};
};

inline leakscope::MessageStream make_stream(const std::vector<std::string>& texts,
                                            leakscope::StreamKind kind =
                                                leakscope::StreamKind::ChatAssistant) {
  leakscope::MessageStream s{kind, {}};
  for (std::size_t i = 0; i < texts.size(); ++i) s.messages.push_back({i, std::nullopt, texts[i], kind});
  return s;
}

inline leakscope::UserRecord make_user(const std::string& id, std::size_t n_messages,
                                       const std::string& age = "25-34",
                                       const std::string& gender = "Male",
                                       const std::string& country = "India") {
  leakscope::UserRecord u;
  u.user_id = id;
  u.profile.age_bracket = age;
  u.profile.gender = gender;
  u.profile.country = country;
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < n_messages; ++i) texts.push_back("message number " + std::to_string(i));
  u.streams[leakscope::StreamKind::ChatAssistant] = make_stream(texts);
  return u;
}

}  // namespace test
