#include "config.hpp"

#include "leakscope/errors.hpp"
#include "leakscope/evaluation.hpp"
#include "leakscope/io.hpp"

namespace leakscope::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw ConfigError(path + ": " + why);
}

// Keys whose values are free-form and not checked against the defaults.
bool free_form(const std::string& path) {
  return path == "synth" || path == "corpus.streams";
}

void reject_unknown(const json& user, const json& defaults, const std::string& path) {
  if (!user.is_object() || !defaults.is_object() || free_form(path)) return;
  for (auto it = user.begin(); it != user.end(); ++it) {
    auto sub = path.empty() ? it.key() : path + "." + it.key();
    if (!defaults.contains(it.key())) fail(sub, "unknown setting");
    reject_unknown(it.value(), defaults[it.key()], sub);
  }
}

const json& at(const json& j, const std::string& path) {
  const json* node = &j;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto dot = path.find('.', start);
    auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(key)) fail(path, "missing");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return *node;
}

double number(const json& j, const std::string& path) {
  const auto& v = at(j, path);
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

long long integer(const json& j, const std::string& path) {
  const auto& v = at(j, path);
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<long long>();
}

bool boolean(const json& j, const std::string& path) {
  const auto& v = at(j, path);
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::string string(const json& j, const std::string& path) {
  const auto& v = at(j, path);
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const std::string& path) {
  const auto& v = at(j, path);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) fail(path, "expected a string or null");
  return v.get<std::string>();
}

std::filesystem::path existing(const std::filesystem::path& base, const std::string& value,
                               const std::string& path) {
  std::filesystem::path p = value;
  if (p.is_relative()) p = base / p;
  if (!std::filesystem::exists(p)) fail(path, "no such file or directory: " + p.string());
  return p;
}

std::optional<std::filesystem::path> optional_path(const json& j, const std::string& path,
                                                   const std::filesystem::path& base) {
  auto v = optional_string(j, path);
  if (!v) return std::nullopt;
  return existing(base, *v, path);
}

}  // namespace

json default_config() {
  json schedule = json::array();
  for (int k : PrefixSchedule::defaults().percentages) schedule.push_back(k);
  SynthSpec synth;
  synth.n_users = 50;
  synth.messages = {20, 60};
  synth.disclosure.mode = SynthSpec::Disclosure::Mode::FirstIndex;
  synth.disclosure.user_fraction = 0.5;
  synth.disclosure.rate_after = 0.1;
  synth.cues.attributes = {Attribute::Age, Attribute::Gender, Attribute::Country};
  synth.cues.user_fraction = 0.8;
  return {
      {"corpus",
       {{"source", "auto"},
        {"file", nullptr},
        {"survey", nullptr},
        {"donations_dir", nullptr},
        {"streams", json::array()}}},
      {"endpoint",
       {{"base_url", "http://127.0.0.1:8000/v1"},
        {"model", "default"},
        {"api_key_env", "LEAKSCOPE_API_KEY"},
        {"concurrency", 4},
        {"max_attempts", 4},
        {"initial_backoff_ms", 500},
        {"max_backoff_ms", 30000},
        {"timeout_s", 120},
        {"requests_per_second", 0},
        {"temperature", 0.0},
        {"max_tokens", 512},
        {"mock", false}}},
      {"filter",
       {{"english_threshold", 0.6},
        {"gazetteer", nullptr},
        {"capitalized_sequences", true},
        {"ner_url", nullptr}}},
      {"audit", {{"flag_source", "unsafe"}, {"histogram_bin_width", 5.0}, {"curve_step", 0.01}}},
      {"cohort", {{"mode", "percentile"}, {"value", 10}, {"require_all_safe", true}}},
      {"inference",
       {{"schedule", schedule},
        {"attributes", {"Age", "Gender", "Country"}},
        {"kinds", {"ChatAssistant"}},
        {"not_reached_counts_as", 100}}},
      {"evaluation", {{"keywords", default_keywords()}, {"sample_per_class", 20}}},
      {"seed", 0},
      {"synth", synth.to_json()},
  };
}

RunConfig load_config(const json& user, const std::filesystem::path& base) {
  if (!user.is_object()) fail("config", "expected an object");
  auto defaults = default_config();
  reject_unknown(user, defaults, "");
  json j = defaults;
  j.merge_patch(user);
  // merge_patch drops keys set to null; restore them so lookups succeed.
  for (auto& [section, body] : defaults.items())
    if (body.is_object())
      for (auto& [key, value] : body.items())
        if (j.contains(section) && j[section].is_object() && !j[section].contains(key))
          j[section][key] = value;
  if (user.contains("synth")) j["synth"] = user["synth"];

  RunConfig c;
  c.effective = j;

  c.corpus.source = string(j, "corpus.source");
  if (c.corpus.source != "auto" && c.corpus.source != "synth" && c.corpus.source != "ingest" &&
      c.corpus.source != "file")
    fail("corpus.source", "expected auto, synth, ingest or file");
  c.corpus.file = optional_path(j, "corpus.file", base);
  if (c.corpus.source == "file" && !c.corpus.file) fail("corpus.file", "required when source is file");
  c.corpus.survey = optional_path(j, "corpus.survey", base);
  c.corpus.donations_dir = optional_path(j, "corpus.donations_dir", base);
  const auto& streams = at(j, "corpus.streams");
  if (!streams.is_array()) fail("corpus.streams", "expected a list");
  for (std::size_t i = 0; i < streams.size(); ++i) {
    auto p = "corpus.streams[" + std::to_string(i) + "]";
    const auto& s = streams[i];
    StreamInput in;
    in.user_id = string(s, "user_id");
    auto kind = parse_stream_kind(string(s, "kind"));
    if (!kind) fail(p + ".kind", "unknown stream kind");
    in.kind = *kind;
    in.path = existing(base, string(s, "path"), p + ".path");
    c.corpus.streams.push_back(std::move(in));
  }

  auto& e = c.endpoint;
  e.base_url = string(j, "endpoint.base_url");
  e.model = string(j, "endpoint.model");
  e.api_key_env = string(j, "endpoint.api_key_env");
  auto concurrency = integer(j, "endpoint.concurrency");
  if (concurrency < 1) fail("endpoint.concurrency", "must be at least 1");
  e.concurrency = static_cast<std::size_t>(concurrency);
  e.max_attempts = static_cast<int>(integer(j, "endpoint.max_attempts"));
  if (e.max_attempts < 1) fail("endpoint.max_attempts", "must be at least 1");
  e.initial_backoff_ms = static_cast<int>(integer(j, "endpoint.initial_backoff_ms"));
  e.max_backoff_ms = static_cast<int>(integer(j, "endpoint.max_backoff_ms"));
  if (e.initial_backoff_ms < 0 || e.max_backoff_ms < 0) fail("endpoint.initial_backoff_ms", "must be non-negative");
  e.timeout_s = static_cast<int>(integer(j, "endpoint.timeout_s"));
  if (e.timeout_s < 1) fail("endpoint.timeout_s", "must be at least 1");
  e.requests_per_second = number(j, "endpoint.requests_per_second");
  e.temperature = number(j, "endpoint.temperature");
  e.max_tokens = static_cast<int>(integer(j, "endpoint.max_tokens"));
  if (e.max_tokens < 1) fail("endpoint.max_tokens", "must be at least 1");
  e.mock = boolean(j, "endpoint.mock");

  c.filter.english_threshold = number(j, "filter.english_threshold");
  if (c.filter.english_threshold < 0 || c.filter.english_threshold > 1)
    fail("filter.english_threshold", "must be in [0, 1]");
  c.filter.gazetteer = optional_path(j, "filter.gazetteer", base);
  c.filter.capitalized_sequences = boolean(j, "filter.capitalized_sequences");
  c.filter.ner_url = optional_string(j, "filter.ner_url");

  auto source = string(j, "audit.flag_source");
  if (source == "unsafe") c.audit.flag_source = FlagSource::Unsafe;
  else if (source == "entity") c.audit.flag_source = FlagSource::Entity;
  else if (source == "either") c.audit.flag_source = FlagSource::Either;
  else fail("audit.flag_source", "expected unsafe, entity or either");
  c.audit.histogram_bin_width = number(j, "audit.histogram_bin_width");
  if (!(c.audit.histogram_bin_width > 0)) fail("audit.histogram_bin_width", "must be positive");
  c.audit.curve_step = number(j, "audit.curve_step");
  if (!(c.audit.curve_step >= 0.001 && c.audit.curve_step <= 1))
    fail("audit.curve_step", "must be in [0.001, 1]");

  auto mode = string(j, "cohort.mode");
  if (mode == "percentile") c.cohort.mode = CohortRule::Mode::Percentile;
  else if (mode == "absolute") c.cohort.mode = CohortRule::Mode::Absolute;
  else fail("cohort.mode", "expected percentile or absolute");
  c.cohort.value = number(j, "cohort.value");
  c.cohort.require_all_safe = boolean(j, "cohort.require_all_safe");
  c.cohort.validate();

  const auto& schedule = at(j, "inference.schedule");
  if (!schedule.is_array()) fail("inference.schedule", "expected a list");
  c.inference.schedule.percentages.clear();
  for (const auto& k : schedule) {
    if (!k.is_number_integer()) fail("inference.schedule", "expected integers");
    c.inference.schedule.percentages.push_back(k.get<int>());
  }
  c.inference.schedule.validate();
  c.inference.attributes.clear();
  for (const auto& a : at(j, "inference.attributes")) {
    auto attr = a.is_string() ? parse_attribute(a.get<std::string>()) : std::nullopt;
    if (!attr) fail("inference.attributes", "unknown attribute " + a.dump());
    c.inference.attributes.push_back(*attr);
  }
  c.inference.kinds.clear();
  for (const auto& k : at(j, "inference.kinds")) {
    auto kind = k.is_string() ? parse_stream_kind(k.get<std::string>()) : std::nullopt;
    if (!kind) fail("inference.kinds", "unknown stream kind " + k.dump());
    c.inference.kinds.push_back(*kind);
  }
  if (integer(j, "inference.not_reached_counts_as") != 100)
    fail("inference.not_reached_counts_as", "only 100 is supported");

  for (const auto& k : at(j, "evaluation.keywords")) {
    if (!k.is_string() || k.get<std::string>().empty()) fail("evaluation.keywords", "expected non-empty strings");
    c.evaluation.keywords.push_back(k.get<std::string>());
  }
  if (c.evaluation.keywords.empty()) fail("evaluation.keywords", "must not be empty");
  auto per_class = integer(j, "evaluation.sample_per_class");
  if (per_class < 1) fail("evaluation.sample_per_class", "must be at least 1");
  c.evaluation.sample_per_class = static_cast<std::size_t>(per_class);

  const auto& seed = at(j, "seed");
  if (!seed.is_number_integer() || seed.get<long long>() < 0) fail("seed", "expected a non-negative integer");
  c.seed = seed.get<std::uint64_t>();

  try {
    c.synth = SynthSpec::from_json(at(j, "synth"));
  } catch (const SpecInvalid& ex) {
    fail("synth", ex.what());
  }
  return c;
}

RunConfig load_config_file(const std::optional<std::filesystem::path>& path) {
  if (!path) return load_config(json::object(), std::filesystem::current_path());
  if (!std::filesystem::exists(*path)) throw ConfigError("--config: no such file: " + path->string());
  json user;
  try {
    user = json::parse(read_file(*path));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  return load_config(user, std::filesystem::absolute(*path).parent_path());
}

}  // namespace leakscope::cli
