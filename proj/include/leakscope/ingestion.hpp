#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leakscope/corpus.hpp"

namespace leakscope {

// Parses a chat-assistant export archive (top-level list of conversations,
// each with a node `mapping`) into the user's own messages. All conversations
// are merged into one stream ordered by message create time; messages without
// a time inherit their conversation's create time, and failing that, the
// effective time of the preceding message in archive order.
//
// Throws DecodeError for malformed JSON or a non-list top level, SchemaError
// for a node/conversation missing a required field. Both name the
// conversation id.
MessageStream parse_chat_export(std::string_view archive);

// Parses an activity log (JSON list of {title, time, titleUrl?}). "Searched
// for " and "Watched " leading phrases are stripped; other titles are kept
// verbatim. Throws UnsupportedKind for ChatAssistant, DecodeError otherwise.
MessageStream parse_search_log(std::string_view log, StreamKind kind);

// RFC 3339 / ISO 8601 timestamp to epoch seconds; nullopt if unparseable.
std::optional<double> parse_iso8601(std::string_view text);

struct SurveyEntry {
  std::string user_id;
  DemographicProfile profile;
};

// CSV with a header row. Required columns: user_id, age_bracket, gender,
// country. Optional: religion, education, income, voting (empty cell = absent).
std::vector<SurveyEntry> parse_survey_csv(std::string_view csv);

struct StreamSource {
  std::string user_id;
  StreamKind kind = StreamKind::ChatAssistant;
  MessageStream stream;
  std::string origin;  // file name, for error messages
};

struct AssembleResult {
  std::vector<UserRecord> users;   // survey order
  std::vector<std::string> report; // one line per surveyed user not emitted, or orphan stream
};

// Throws DuplicateStream if a user has two streams of the same kind.
AssembleResult assemble_users(std::vector<StreamSource> streams,
                              const std::vector<SurveyEntry>& survey);

}  // namespace leakscope
