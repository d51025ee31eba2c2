#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "leakscope/corpus.hpp"

namespace leakscope {

using Weights = std::vector<std::pair<std::string, double>>;

struct SynthSpec {
  struct Range {
    std::size_t min = 20;
    std::size_t max = 60;
  };

  struct Disclosure {
    enum class Mode { None, FirstIndex, EveryMth, Rate };
    Mode mode = Mode::None;
    double user_fraction = 1.0;          // users receiving any plant
    std::optional<std::size_t> index;    // first_index: fixed index, else uniform
    double rate_after = 0.0;             // first_index: later plant probability
    std::size_t m = 4;                   // every_mth
    std::size_t offset = 0;              // every_mth: first planted index
    double rate = 0.3;                   // rate
    Weights categories;                  // planted category mix; empty = uniform
  };

  struct Cues {
    std::vector<Attribute> attributes;
    double user_fraction = 1.0;
    std::vector<StreamKind> kinds{StreamKind::ChatAssistant};
  };

  std::size_t n_users = 0;
  std::uint64_t seed = 0;
  Range messages;
  std::map<Attribute, Weights> demographics;  // missing = uniform default set
  double extended_fraction = 0.0;
  Disclosure disclosure;
  Cues cues;
  std::map<StreamKind, double> extra_streams;  // kind -> share of users

  // Throws SpecInvalid naming the offending field path.
  static SynthSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

struct PlantedUser {
  std::string user_id;
  DemographicProfile profile;
  std::map<StreamKind, std::size_t> lengths;
  std::vector<std::size_t> planted_indices;          // chat stream, ascending
  std::vector<std::string> planted_categories;       // parallel to planted_indices
  std::map<StreamKind, std::map<Attribute, std::size_t>> cues;

  std::optional<std::size_t> first_flag_index() const;
};

struct SynthCorpus {
  std::vector<UserRecord> users;
  std::vector<PlantedUser> manifest;

  nlohmann::json manifest_json() const;
};

// Deterministic for a given spec. Self-checks the filler pool first.
SynthCorpus generate(const SynthSpec& spec);

std::vector<PlantedUser> parse_manifest(const nlohmann::json& j);

// The sentence every planted disclosure message carries.
std::span<const std::string_view> disclosure_sentences();
// Neutral filler pool for a stream kind.
std::span<const std::string_view> filler_pool(StreamKind kind);

}  // namespace leakscope
