#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "leakscope/cohort.hpp"
#include "leakscope/corpus.hpp"
#include "leakscope/inference.hpp"
#include "leakscope/synth.hpp"

namespace leakscope::cli {

enum class FlagSource { Unsafe, Entity, Either };

struct StreamInput {
  std::string user_id;
  StreamKind kind = StreamKind::ChatAssistant;
  std::filesystem::path path;
};

struct RunConfig {
  struct Corpus {
    std::string source = "auto";  // auto | synth | ingest | file
    std::optional<std::filesystem::path> file;
    std::optional<std::filesystem::path> survey;
    std::optional<std::filesystem::path> donations_dir;
    std::vector<StreamInput> streams;
  } corpus;

  struct Endpoint {
    std::string base_url;
    std::string model;
    std::string api_key_env;
    std::size_t concurrency = 4;
    int max_attempts = 4;
    int initial_backoff_ms = 500;
    int max_backoff_ms = 30000;
    int timeout_s = 120;
    double requests_per_second = 0.0;
    double temperature = 0.0;
    int max_tokens = 512;
    bool mock = false;
  } endpoint;

  struct Filter {
    double english_threshold = 0.6;
    std::optional<std::filesystem::path> gazetteer;
    bool capitalized_sequences = true;
    std::optional<std::string> ner_url;
  } filter;

  struct Audit {
    FlagSource flag_source = FlagSource::Unsafe;
    double histogram_bin_width = 5.0;
    double curve_step = 0.01;
  } audit;

  CohortRule cohort;
  MatrixOptions inference;

  struct Evaluation {
    std::vector<std::string> keywords;
    std::size_t sample_per_class = 20;
  } evaluation;

  std::uint64_t seed = 0;
  SynthSpec synth;

  nlohmann::json effective;  // merged document, for the ledger
};

// Every knob with its default value.
nlohmann::json default_config();

// Overlays `user` on the defaults and validates. Relative paths resolve
// against `base_dir`. Throws ConfigError naming the field path.
RunConfig load_config(const nlohmann::json& user, const std::filesystem::path& base_dir);
RunConfig load_config_file(const std::optional<std::filesystem::path>& path);

}  // namespace leakscope::cli
