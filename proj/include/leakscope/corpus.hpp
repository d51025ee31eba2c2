#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace leakscope {

enum class StreamKind { ChatAssistant, WebSearch, VideoSearch, VideoWatch };

inline constexpr StreamKind kAllStreamKinds[] = {
    StreamKind::ChatAssistant, StreamKind::WebSearch, StreamKind::VideoSearch,
    StreamKind::VideoWatch};

std::string_view to_string(StreamKind kind);
std::optional<StreamKind> parse_stream_kind(std::string_view name);

enum class Attribute { Age, Gender, Country, Religion, Education, Income, Voting };

inline constexpr Attribute kAllAttributes[] = {
    Attribute::Age,       Attribute::Gender, Attribute::Country,
    Attribute::Religion,  Attribute::Education, Attribute::Income,
    Attribute::Voting};

std::string_view to_string(Attribute attribute);
std::optional<Attribute> parse_attribute(std::string_view name);

// Country is the only open-label attribute.
bool is_open_label(Attribute attribute);
// Religion, Education, Income, Voting.
bool is_extended(Attribute attribute);
// Closed label set in its display spelling; empty for Country.
std::span<const std::string_view> allowed_labels(Attribute attribute);
// Profile field name used in the corpus file ("age_bracket", "gender", ...).
std::string_view profile_field(Attribute attribute);

// Maps a raw label onto the display spelling of the attribute's closed set
// when it canonically matches a member; otherwise returns the trimmed input.
std::string normalize_label(Attribute attribute, std::string_view raw);

struct Message {
  std::size_t index = 0;
  std::optional<double> timestamp;  // epoch seconds
  std::string text;
  StreamKind source = StreamKind::ChatAssistant;

  bool operator==(const Message&) const = default;
};

struct MessageStream {
  StreamKind kind = StreamKind::ChatAssistant;
  std::vector<Message> messages;

  std::size_t size() const { return messages.size(); }
  bool empty() const { return messages.empty(); }
  bool operator==(const MessageStream&) const = default;
};

struct DemographicProfile {
  std::string age_bracket;
  std::string gender;
  std::string country;
  std::optional<std::string> religion;
  std::optional<std::string> education;
  std::optional<std::string> income;
  std::optional<std::string> voting;

  std::optional<std::string> label(Attribute attribute) const;
  void set_label(Attribute attribute, std::optional<std::string> value);
  bool has_extended() const;

  bool operator==(const DemographicProfile&) const = default;
};

struct UserRecord {
  std::string user_id;
  DemographicProfile profile;
  std::map<StreamKind, MessageStream> streams;

  const MessageStream* stream(StreamKind kind) const;
  bool operator==(const UserRecord&) const = default;
};

struct Violation {
  std::string user_id;
  std::string field;
  std::string rule;
};

std::vector<Violation> validate_user(const UserRecord& record);

// Re-indexes messages 0..N-1 and stamps every message with the stream kind.
void reindex(MessageStream& stream);

// Corpus file: one JSON UserRecord per line.
nlohmann::json to_json(const UserRecord& record);
UserRecord user_from_json(const nlohmann::json& j);
std::string serialize_corpus(std::span<const UserRecord> users);
std::vector<UserRecord> parse_corpus(std::string_view text);
std::vector<UserRecord> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path,
                  std::span<const UserRecord> users);

}  // namespace leakscope
