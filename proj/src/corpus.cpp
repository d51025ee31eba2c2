#include "leakscope/corpus.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "leakscope/canonical.hpp"
#include "leakscope/errors.hpp"
#include "leakscope/io.hpp"

namespace leakscope {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 4> kStreamNames = {
    "ChatAssistant", "WebSearch", "VideoSearch", "VideoWatch"};
constexpr std::array<std::string_view, 7> kAttributeNames = {
    "Age", "Gender", "Country", "Religion", "Education", "Income", "Voting"};
constexpr std::array<std::string_view, 7> kProfileFields = {
    "age_bracket", "gender", "country", "religion", "education", "income", "voting"};

constexpr std::string_view kAgeLabels[] = {"18-24", "25-34", "35-44", "45+"};
constexpr std::string_view kGenderLabels[] = {"Male", "Female"};
constexpr std::string_view kReligionLabels[] = {"hindu", "muslim", "christian", "other"};
constexpr std::string_view kEducationLabels[] = {"class_9_10", "class_11_12_diploma",
                                                 "graduate_or_above"};
constexpr std::string_view kIncomeLabels[] = {"less_than_20k", "20k_to_50k",
                                              "50k_to_1lakh", "1lakh_or_more"};
constexpr std::string_view kVotingLabels[] = {"ruling_party", "main_opposition",
                                              "another_party"};

std::optional<std::string> optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw SchemaError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

const json& require(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(where + ": missing field '" + key + "'");
  return *it;
}

}  // namespace

std::string_view to_string(StreamKind kind) {
  return kStreamNames[static_cast<std::size_t>(kind)];
}

std::optional<StreamKind> parse_stream_kind(std::string_view name) {
  for (std::size_t i = 0; i < kStreamNames.size(); ++i)
    if (kStreamNames[i] == name) return static_cast<StreamKind>(i);
  return std::nullopt;
}

std::string_view to_string(Attribute attribute) {
  return kAttributeNames[static_cast<std::size_t>(attribute)];
}

std::optional<Attribute> parse_attribute(std::string_view name) {
  auto canon = canonicalize(name);
  for (std::size_t i = 0; i < kAttributeNames.size(); ++i)
    if (canonicalize(kAttributeNames[i]) == canon) return static_cast<Attribute>(i);
  return std::nullopt;
}

bool is_open_label(Attribute attribute) { return attribute == Attribute::Country; }

bool is_extended(Attribute attribute) {
  switch (attribute) {
    case Attribute::Religion:
    case Attribute::Education:
    case Attribute::Income:
    case Attribute::Voting:
      return true;
    default:
      return false;
  }
}

std::span<const std::string_view> allowed_labels(Attribute attribute) {
  switch (attribute) {
    case Attribute::Age: return kAgeLabels;
    case Attribute::Gender: return kGenderLabels;
    case Attribute::Country: return {};
    case Attribute::Religion: return kReligionLabels;
    case Attribute::Education: return kEducationLabels;
    case Attribute::Income: return kIncomeLabels;
    case Attribute::Voting: return kVotingLabels;
  }
  return {};
}

std::string_view profile_field(Attribute attribute) {
  return kProfileFields[static_cast<std::size_t>(attribute)];
}

std::string normalize_label(Attribute attribute, std::string_view raw) {
  auto canon = canonicalize(raw);
  for (auto label : allowed_labels(attribute))
    if (canonicalize(label) == canon) return std::string(label);
  return std::string(trim(raw));
}

std::optional<std::string> DemographicProfile::label(Attribute attribute) const {
  switch (attribute) {
    case Attribute::Age: return age_bracket;
    case Attribute::Gender: return gender;
    case Attribute::Country: return country;
    case Attribute::Religion: return religion;
    case Attribute::Education: return education;
    case Attribute::Income: return income;
    case Attribute::Voting: return voting;
  }
  return std::nullopt;
}

void DemographicProfile::set_label(Attribute attribute, std::optional<std::string> value) {
  switch (attribute) {
    case Attribute::Age: age_bracket = value.value_or(""); break;
    case Attribute::Gender: gender = value.value_or(""); break;
    case Attribute::Country: country = value.value_or(""); break;
    case Attribute::Religion: religion = std::move(value); break;
    case Attribute::Education: education = std::move(value); break;
    case Attribute::Income: income = std::move(value); break;
    case Attribute::Voting: voting = std::move(value); break;
  }
}

bool DemographicProfile::has_extended() const {
  return religion || education || income || voting;
}

const MessageStream* UserRecord::stream(StreamKind kind) const {
  auto it = streams.find(kind);
  return it == streams.end() ? nullptr : &it->second;
}

std::vector<Violation> validate_user(const UserRecord& record) {
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string rule) {
    out.push_back({record.user_id, std::move(field), std::move(rule)});
  };

  if (trim(record.user_id).empty()) add("user_id", "user_id must be non-empty");

  for (auto attribute : kAllAttributes) {
    auto value = record.profile.label(attribute);
    std::string field = "profile." + std::string(profile_field(attribute));
    if (!is_extended(attribute) && (!value || trim(*value).empty())) {
      add(field, "core attribute must be present");
      continue;
    }
    if (!value || is_open_label(attribute)) continue;
    auto canon = canonicalize(*value);
    auto labels = allowed_labels(attribute);
    bool ok = std::any_of(labels.begin(), labels.end(),
                          [&](std::string_view l) { return canonicalize(l) == canon; });
    if (!ok) add(field, "value '" + *value + "' not in closed label set");
  }
  const auto& p = record.profile;
  int extended_present = p.religion.has_value() + p.education.has_value() +
                         p.income.has_value() + p.voting.has_value();
  if (extended_present != 0 && extended_present != 4)
    add("profile", "extended attributes must be all present or all absent");

  if (!record.stream(StreamKind::ChatAssistant))
    add("streams.ChatAssistant", "ChatAssistant stream must be present");

  for (const auto& [kind, stream] : record.streams) {
    std::string base = "streams." + std::string(to_string(kind));
    if (stream.kind != kind) add(base, "stream kind does not match its key");
    for (std::size_t i = 0; i < stream.messages.size(); ++i) {
      const auto& m = stream.messages[i];
      std::string field = base + "[" + std::to_string(i) + "]";
      if (m.index != i) {
        add(field + ".index", "index contiguity: expected " + std::to_string(i) + ", found " +
                                  std::to_string(m.index));
      }
      if (trim(m.text).empty()) add(field + ".text", "text must be non-empty after trimming");
      if (m.source != kind) add(field + ".source", "message source differs from stream kind");
    }
  }
  return out;
}

void reindex(MessageStream& stream) {
  for (std::size_t i = 0; i < stream.messages.size(); ++i) {
    stream.messages[i].index = i;
    stream.messages[i].source = stream.kind;
  }
}

json to_json(const UserRecord& record) {
  json profile = json::object();
  for (auto attribute : kAllAttributes) {
    if (auto v = record.profile.label(attribute))
      profile[std::string(profile_field(attribute))] = *v;
  }
  json streams = json::object();
  for (const auto& [kind, stream] : record.streams) {
    json messages = json::array();
    for (const auto& m : stream.messages) {
      json jm = {{"index", m.index}, {"text", m.text}, {"source", to_string(m.source)}};
      jm["timestamp"] = m.timestamp ? json(*m.timestamp) : json(nullptr);
      messages.push_back(std::move(jm));
    }
    streams[std::string(to_string(kind))] = std::move(messages);
  }
  return {{"user_id", record.user_id}, {"profile", profile}, {"streams", streams}};
}

UserRecord user_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("user record must be an object");
  UserRecord record;
  record.user_id = require(j, "user_id", "user record").get<std::string>();
  const std::string where = "user " + record.user_id;
  const auto& profile = require(j, "profile", where);
  for (auto attribute : kAllAttributes) {
    auto raw = optional_string(profile, std::string(profile_field(attribute)).c_str());
    if (raw) raw = normalize_label(attribute, *raw);
    record.profile.set_label(attribute, raw);
  }
  const auto& streams = require(j, "streams", where);
  if (!streams.is_object()) throw SchemaError(where + ": streams must be an object");
  for (const auto& [name, messages] : streams.items()) {
    auto kind = parse_stream_kind(name);
    if (!kind) throw SchemaError(where + ": unknown stream kind '" + name + "'");
    MessageStream stream{*kind, {}};
    for (const auto& jm : messages) {
      Message m;
      m.index = require(jm, "index", where).get<std::size_t>();
      m.text = require(jm, "text", where).get<std::string>();
      if (auto ts = jm.find("timestamp"); ts != jm.end() && !ts->is_null())
        m.timestamp = ts->get<double>();
      m.source = *kind;
      if (auto src = jm.find("source"); src != jm.end()) {
        auto parsed = parse_stream_kind(src->get<std::string>());
        if (!parsed) throw SchemaError(where + ": unknown message source");
        m.source = *parsed;
      }
      stream.messages.push_back(std::move(m));
    }
    record.streams.emplace(*kind, std::move(stream));
  }
  return record;
}

std::string serialize_corpus(std::span<const UserRecord> users) {
  std::string out;
  for (const auto& u : users) {
    out += to_json(u).dump();
    out += '\n';
  }
  return out;
}

std::vector<UserRecord> parse_corpus(std::string_view text) {
  std::vector<UserRecord> users;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DecodeError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      users.push_back(user_from_json(j));
    } catch (const json::exception& e) {
      throw SchemaError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return users;
}

std::vector<UserRecord> read_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path));
}

void write_corpus(const std::filesystem::path& path, std::span<const UserRecord> users) {
  write_file_atomic(path, serialize_corpus(users));
}

}  // namespace leakscope
