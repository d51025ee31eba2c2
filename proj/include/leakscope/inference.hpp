#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "leakscope/corpus.hpp"
#include "leakscope/llm/gateway.hpp"

namespace leakscope {

struct PrefixSchedule {
  std::vector<int> percentages;  // ascending, in (0, 100], ending at 100

  static PrefixSchedule defaults();  // 5, 10, ..., 100
  void validate() const;             // throws ConfigError
};

// The first max(1, ceil(k/100 * N)) messages. Throws EmptyStream for N = 0.
MessageStream prefix_slice(const MessageStream& stream, int k);
std::size_t prefix_length(std::size_t n, int k);

struct TraceStep {
  int k = 0;
  std::optional<std::string> label;  // nullopt = Unparsed
  std::string rationale;
  std::string raw;
  std::optional<std::string> error;  // oracle gave up at this step
};

struct TraceOutcome {
  std::optional<int> context_needed;  // nullopt = NotReached
  std::optional<std::string> final_label;
  std::string rationale_at_stopping;
};

struct InferenceTrace {
  std::string user_id;
  Attribute attribute = Attribute::Age;
  StreamKind kind = StreamKind::ChatAssistant;
  std::string truth;  // canonical
  std::vector<TraceStep> steps;
  TraceOutcome outcome;

  std::string key() const;  // "user_id|Attribute|Kind"
};

nlohmann::json to_json(const InferenceTrace& trace);
InferenceTrace trace_from_json(const nlohmann::json& j);
std::string serialize_traces(std::span<const InferenceTrace> traces);
std::vector<InferenceTrace> parse_traces(std::string_view jsonl);

// Canonical comparison; Country also goes through the alias table.
bool labels_match(Attribute attribute, std::string_view truth, std::string_view label);

// Queries prefixes in schedule order and stops at the first label matching
// the ground truth. Throws MissingGroundTruth, MissingStream, UnsupportedKind
// (no prompt for the combination) and EmptyStream.
InferenceTrace run_trace(const UserRecord& user, Attribute attribute, StreamKind kind,
                         llm::LlmGateway& gateway,
                         const PrefixSchedule& schedule = PrefixSchedule::defaults());

struct MatrixOptions {
  std::vector<Attribute> attributes{Attribute::Age, Attribute::Gender, Attribute::Country};
  std::vector<StreamKind> kinds{StreamKind::ChatAssistant};
  PrefixSchedule schedule = PrefixSchedule::defaults();
  // Append-only record of finished traces. Traces already present are reused.
  std::optional<std::filesystem::path> journal;
};

struct SkippedCombination {
  std::string user_id;
  Attribute attribute;
  StreamKind kind;
  std::string reason;
};

struct FailedTrace {
  std::string user_id;
  Attribute attribute;
  StreamKind kind;
  std::string error;
};

struct MatrixResult {
  std::vector<InferenceTrace> traces;  // user, attribute, kind order
  std::vector<SkippedCombination> skipped;
  std::vector<FailedTrace> failed;
  std::size_t resumed = 0;  // traces taken from the journal
};

// One trace per valid (user, attribute, kind). Country is skipped for users
// carrying extended attributes and for non-chat streams; extended attributes
// are skipped for users without them; missing streams are skipped.
MatrixResult run_matrix(std::span<const UserRecord> users, const MatrixOptions& options,
                        llm::LlmGateway& gateway);

}  // namespace leakscope
