#include "leakscope/inference.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>

#include "leakscope/canonical.hpp"
#include "leakscope/errors.hpp"
#include "leakscope/io.hpp"
#include "leakscope/llm/concurrency.hpp"
#include "leakscope/llm/parse.hpp"
#include "leakscope/llm/prompts.hpp"

namespace leakscope {

PrefixSchedule PrefixSchedule::defaults() {
  PrefixSchedule s;
  for (int k = 5; k <= 100; k += 5) s.percentages.push_back(k);
  return s;
}

void PrefixSchedule::validate() const {
  if (percentages.empty()) throw ConfigError("schedule: must not be empty");
  for (std::size_t i = 0; i < percentages.size(); ++i) {
    int k = percentages[i];
    if (k <= 0 || k > 100) throw ConfigError("schedule[" + std::to_string(i) + "]: outside (0, 100]");
    if (i && k <= percentages[i - 1])
      throw ConfigError("schedule[" + std::to_string(i) + "]: not strictly ascending");
  }
  if (percentages.back() != 100) throw ConfigError("schedule: last value must be 100");
}

std::size_t prefix_length(std::size_t n, int k) {
  auto len = (static_cast<std::size_t>(k) * n + 99) / 100;
  return std::clamp<std::size_t>(len, 1, n);
}

MessageStream prefix_slice(const MessageStream& stream, int k) {
  if (stream.empty()) throw EmptyStream("prefix of an empty stream");
  if (k <= 0 || k > 100) throw Error("prefix percentage outside (0, 100]");
  MessageStream out{stream.kind, {}};
  auto len = prefix_length(stream.size(), k);
  out.messages.assign(stream.messages.begin(),
                      stream.messages.begin() + static_cast<std::ptrdiff_t>(len));
  return out;
}

std::string InferenceTrace::key() const {
  return user_id + "|" + std::string(to_string(attribute)) + "|" + std::string(to_string(kind));
}

bool labels_match(Attribute attribute, std::string_view truth, std::string_view label) {
  if (attribute == Attribute::Country) return canonical_country(truth) == canonical_country(label);
  return canonicalize(truth) == canonicalize(label);
}

nlohmann::json to_json(const InferenceTrace& t) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : t.steps) {
    nlohmann::json step = {{"k", s.k},
                           {"label", s.label ? nlohmann::json(*s.label) : nlohmann::json(nullptr)},
                           {"rationale", s.rationale},
                           {"raw", s.raw}};
    if (s.error) step["error"] = *s.error;
    steps.push_back(std::move(step));
  }
  return {
      {"user_id", t.user_id},
      {"attribute", to_string(t.attribute)},
      {"kind", to_string(t.kind)},
      {"truth", t.truth},
      {"steps", std::move(steps)},
      {"outcome",
       {{"context_needed", t.outcome.context_needed ? nlohmann::json(*t.outcome.context_needed)
                                                    : nlohmann::json("NotReached")},
        {"final_label", t.outcome.final_label ? nlohmann::json(*t.outcome.final_label)
                                              : nlohmann::json(nullptr)},
        {"rationale_at_stopping", t.outcome.rationale_at_stopping}}},
  };
}

InferenceTrace trace_from_json(const nlohmann::json& j) {
  try {
    InferenceTrace t;
    t.user_id = j.at("user_id").get<std::string>();
    auto attr = parse_attribute(j.at("attribute").get<std::string>());
    auto kind = parse_stream_kind(j.at("kind").get<std::string>());
    if (!attr || !kind) throw SchemaError("trace " + t.user_id + ": unknown attribute or kind");
    t.attribute = *attr;
    t.kind = *kind;
    t.truth = j.at("truth").get<std::string>();
    for (const auto& s : j.at("steps")) {
      TraceStep step;
      step.k = s.at("k").get<int>();
      if (!s.at("label").is_null()) step.label = s["label"].get<std::string>();
      step.rationale = s.at("rationale").get<std::string>();
      step.raw = s.at("raw").get<std::string>();
      if (s.contains("error")) step.error = s["error"].get<std::string>();
      t.steps.push_back(std::move(step));
    }
    const auto& o = j.at("outcome");
    if (o.at("context_needed").is_number()) t.outcome.context_needed = o["context_needed"].get<int>();
    if (!o.at("final_label").is_null()) t.outcome.final_label = o["final_label"].get<std::string>();
    t.outcome.rationale_at_stopping = o.at("rationale_at_stopping").get<std::string>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed trace record: ") + e.what());
  }
}

std::string serialize_traces(std::span<const InferenceTrace> traces) {
  std::string out;
  for (const auto& t : traces) out += to_json(t).dump() + "\n";
  return out;
}

std::vector<InferenceTrace> parse_traces(std::string_view jsonl) {
  std::vector<InferenceTrace> out;
  while (!jsonl.empty()) {
    auto nl = jsonl.find('\n');
    auto line = trim(jsonl.substr(0, nl));
    jsonl = nl == std::string_view::npos ? std::string_view{} : jsonl.substr(nl + 1);
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DecodeError(std::string("trace store: ") + e.what());
    }
    out.push_back(trace_from_json(j));
  }
  return out;
}

InferenceTrace run_trace(const UserRecord& user, Attribute attribute, StreamKind kind,
                         llm::LlmGateway& gateway, const PrefixSchedule& schedule) {
  auto truth = user.profile.label(attribute);
  if (!truth || trim(*truth).empty())
    throw MissingGroundTruth(user.user_id + " has no " + std::string(to_string(attribute)) + " label");
  const auto* stream = user.stream(kind);
  if (!stream) throw MissingStream(user.user_id + " has no " + std::string(to_string(kind)) + " stream");
  auto tid = llm::template_for(attribute, kind);
  if (!tid)
    throw UnsupportedKind(std::string(to_string(attribute)) + " is not queried on " +
                          std::string(to_string(kind)));
  if (stream->empty()) throw EmptyStream(user.user_id + ": empty " + std::string(to_string(kind)));

  std::optional<std::string_view> phrase;
  if (llm::has_source_slot(*tid)) phrase = llm::source_phrase(kind);

  InferenceTrace trace;
  trace.user_id = user.user_id;
  trace.attribute = attribute;
  trace.kind = kind;
  trace.truth = attribute == Attribute::Country ? canonical_country(*truth) : canonicalize(*truth);

  for (int k : schedule.percentages) {
    auto len = prefix_length(stream->size(), k);
    std::vector<std::string> payload;
    payload.reserve(len);
    for (std::size_t i = 0; i < len; ++i) payload.push_back(stream->messages[i].text);

    TraceStep step;
    step.k = k;
    try {
      step.raw = gateway.complete(llm::render(*tid, phrase, payload));
      auto parsed = llm::parse_labeled(step.raw, attribute);
      step.label = std::move(parsed.label);
      step.rationale = std::move(parsed.rationale);
    } catch (const OracleError& e) {
      step.error = e.what();
    }
    bool matched = step.label && labels_match(attribute, trace.truth, *step.label);
    trace.steps.push_back(std::move(step));
    const auto& last = trace.steps.back();
    if (matched || k == schedule.percentages.back()) {
      if (matched) trace.outcome.context_needed = k;
      trace.outcome.final_label = last.label;
      trace.outcome.rationale_at_stopping = last.rationale;
      break;
    }
  }
  return trace;
}

MatrixResult run_matrix(std::span<const UserRecord> users, const MatrixOptions& options,
                        llm::LlmGateway& gateway) {
  options.schedule.validate();
  MatrixResult result;

  struct Job {
    const UserRecord* user;
    Attribute attribute;
    StreamKind kind;
  };
  std::vector<Job> jobs;
  for (const auto& user : users) {
    for (auto attribute : options.attributes) {
      for (auto kind : options.kinds) {
        auto skip = [&](std::string reason) {
          result.skipped.push_back({user.user_id, attribute, kind, std::move(reason)});
        };
        if (attribute == Attribute::Country && user.profile.has_extended()) {
          skip("country not analysed for users with extended attributes");
        } else if (!llm::template_for(attribute, kind)) {
          skip("no prompt for this attribute on this stream");
        } else if (auto truth = user.profile.label(attribute); !truth || trim(*truth).empty()) {
          skip("no ground truth");
        } else if (const auto* s = user.stream(kind); !s || s->empty()) {
          skip("no stream");
        } else {
          jobs.push_back({&user, attribute, kind});
        }
      }
    }
  }

  std::map<std::string, InferenceTrace> journaled;
  if (options.journal && std::filesystem::exists(*options.journal)) {
    for (auto& t : parse_traces(read_file(*options.journal))) {
      auto key = t.key();
      journaled.insert_or_assign(std::move(key), std::move(t));
    }
  }

  std::vector<std::optional<InferenceTrace>> traces(jobs.size());
  std::vector<std::optional<std::string>> errors(jobs.size());
  std::mutex journal_mutex;
  std::atomic<std::size_t> resumed{0};
  llm::parallel_for(jobs.size(), gateway.concurrency(), [&](std::size_t i) {
    const auto& job = jobs[i];
    auto key = job.user->user_id + "|" + std::string(to_string(job.attribute)) + "|" +
               std::string(to_string(job.kind));
    if (auto it = journaled.find(key); it != journaled.end()) {
      traces[i] = it->second;
      ++resumed;
      return;
    }
    try {
      traces[i] = run_trace(*job.user, job.attribute, job.kind, gateway, options.schedule);
    } catch (const Error& e) {
      errors[i] = e.what();
      return;
    }
    if (options.journal) {
      auto line = to_json(*traces[i]).dump();
      std::lock_guard lock(journal_mutex);
      append_line(*options.journal, line);
    }
  });

  result.resumed = resumed.load();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (traces[i]) result.traces.push_back(std::move(*traces[i]));
    else result.failed.push_back({jobs[i].user->user_id, jobs[i].attribute, jobs[i].kind, *errors[i]});
  }
  return result;
}

}  // namespace leakscope
