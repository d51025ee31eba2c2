// Acceptance checks. Each criterion prints one PASS/FAIL line; run with a
// criterion name to check only that one (the exit status reflects it).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "leakscope/audit.hpp"
#include "leakscope/canonical.hpp"
#include "leakscope/cohort.hpp"
#include "leakscope/csv.hpp"
#include "leakscope/disclosure_filter.hpp"
#include "leakscope/evaluation.hpp"
#include "leakscope/inference.hpp"
#include "leakscope/io.hpp"
#include "leakscope/llm/gateway.hpp"
#include "leakscope/llm/mock_oracle.hpp"
#include "leakscope/llm/parse.hpp"
#include "leakscope/llm/prompts.hpp"
#include "leakscope/synth.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace leakscope;

namespace {

// Tolerances and budgets.
constexpr double kBaselineTolerance = 0.005;
constexpr double kSummaryTolerance = 1e-9;
constexpr double kMetricTolerance = 1e-12;
constexpr double kLinearR2 = 0.99;
constexpr double kBaselineBudgetSeconds = 1.0;
constexpr double kDiscoveryBudgetSeconds = 10.0;
constexpr double kProtocolBudgetSeconds = 30.0;

struct Result {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream o;
  o.precision(precision);
  o << v;
  return o.str();
}

Result baseline(std::vector<std::size_t> supports, double expected) {
  auto start = Clock::now();
  double f1 = majority_baseline(supports);
  double elapsed = seconds_since(start);
  bool ok = std::abs(f1 - expected) <= kBaselineTolerance && elapsed < kBaselineBudgetSeconds;
  return {ok, "weighted F1 " + fmt(f1) + " vs " + fmt(expected) + " +/- " + fmt(kBaselineTolerance) +
                  ", " + fmt(elapsed, 3) + " s"};
}

Result ac1_age() { return baseline({389, 424, 185, 59}, 0.23); }
Result ac1_gender() { return baseline({359, 698}, 0.52); }
Result ac1_country() { return baseline({205, 456, 206, 190}, 0.26); }

llm::GatewayOptions quiet_gateway(std::size_t concurrency = 8) {
  llm::GatewayOptions o;
  o.concurrency = concurrency;
  return o;
}

Result ac2() {
  auto start = Clock::now();
  SynthSpec spec;
  spec.n_users = 500;
  spec.seed = 2;
  spec.disclosure.mode = SynthSpec::Disclosure::Mode::FirstIndex;
  spec.disclosure.user_fraction = 0.8;
  spec.disclosure.rate_after = 0.1;
  auto corpus = generate(spec);

  llm::MockOracle mock;
  llm::LlmGateway gw(mock, quiet_gateway());
  std::size_t mismatches = 0;
  std::vector<std::optional<double>> points;
  std::vector<double> brute;
  for (std::size_t i = 0; i < corpus.users.size(); ++i) {
    const auto& chat = *corpus.users[i].stream(StreamKind::ChatAssistant);
    std::vector<std::size_t> flagged;
    for (const auto& v : classify_safety(chat, gw))
      if (v.verdict == llm::Verdict::Unsafe) flagged.push_back(v.message_index);
    auto point = discovery_point(flagged, chat.size());
    points.push_back(point);

    const auto& m = corpus.manifest[i];
    std::optional<double> expected;
    if (!m.planted_indices.empty())
      expected = 100.0 * static_cast<double>(m.planted_indices.front()) /
                 static_cast<double>(m.lengths.at(StreamKind::ChatAssistant));
    if (point != expected) ++mismatches;
    if (expected) brute.push_back(*expected);
  }
  auto summary = discovery_summary(points);
  std::sort(brute.begin(), brute.end());
  double mean = 0;
  for (double b : brute) mean += b;
  mean /= static_cast<double>(brute.size());
  auto n = brute.size();
  double median = n % 2 ? brute[n / 2] : (brute[n / 2 - 1] + brute[n / 2]) / 2;
  double elapsed = seconds_since(start);
  bool ok = mismatches == 0 && summary.count == brute.size() &&
            std::abs(summary.mean - mean) <= kSummaryTolerance &&
            std::abs(summary.median - median) <= kSummaryTolerance &&
            elapsed < kDiscoveryBudgetSeconds;
  return {ok, std::to_string(corpus.users.size()) + " users, " + std::to_string(mismatches) +
                  " point mismatches, mean " + fmt(summary.mean, 12) + " vs " + fmt(mean, 12) +
                  ", median " + fmt(summary.median, 12) + " vs " + fmt(median, 12) + ", " +
                  fmt(elapsed, 3) + " s"};
}

// Smallest schedule entry whose prefix covers the cue message.
std::optional<int> derived_context(std::size_t n, std::size_t cue, const PrefixSchedule& schedule) {
  for (int k : schedule.percentages) {
    // ceil(k/100 * N) in exact integer arithmetic
    std::size_t covered = (static_cast<std::size_t>(k) * n + 99) / 100;
    if (covered >= cue + 1) return k;
  }
  return std::nullopt;
}

Result ac3() {
  auto start = Clock::now();
  SynthSpec spec;
  spec.n_users = 200;
  spec.seed = 3;
  spec.cues.attributes = {Attribute::Age, Attribute::Gender, Attribute::Country};
  spec.cues.user_fraction = 0.7;
  auto corpus = generate(spec);

  llm::MockOracle mock;
  llm::LlmGateway gw(mock, quiet_gateway());
  auto result = run_matrix(corpus.users, MatrixOptions{}, gw);
  std::map<std::string, const PlantedUser*> manifest;
  for (const auto& m : corpus.manifest) manifest[m.user_id] = &m;

  std::size_t checked = 0, wrong = 0, not_reached = 0;
  for (const auto& t : result.traces) {
    const auto& m = *manifest.at(t.user_id);
    std::optional<int> expected;
    auto kind_cues = m.cues.find(t.kind);
    if (kind_cues != m.cues.end()) {
      auto cue = kind_cues->second.find(t.attribute);
      if (cue != kind_cues->second.end())
        expected = derived_context(m.lengths.at(t.kind), cue->second, PrefixSchedule::defaults());
    }
    ++checked;
    if (!t.outcome.context_needed) ++not_reached;
    if (t.outcome.context_needed != expected) ++wrong;
  }
  double elapsed = seconds_since(start);
  bool ok = wrong == 0 && result.failed.empty() && checked > 0 && elapsed < kProtocolBudgetSeconds;
  return {ok, std::to_string(checked) + " traces, " + std::to_string(wrong) + " mismatches, " +
                  std::to_string(not_reached) + " NotReached, " + fmt(elapsed, 3) + " s"};
}

Result ac4() {
  std::mt19937_64 rng(4);
  const auto labels = allowed_labels(Attribute::Age);
  std::size_t instances = 0, worst_index = 0;
  double worst = 0;
  for (; instances < 1000; ++instances) {
    std::size_t k = 1 + rng() % std::min<std::size_t>(5, labels.size());
    std::vector<std::string> classes;
    for (std::size_t c = 0; c < k; ++c) classes.push_back(canonicalize(labels[c]));
    std::size_t items = 1 + rng() % 50;
    std::vector<InferenceTrace> traces;
    std::vector<test::Pair> pairs;
    for (std::size_t i = 0; i < items; ++i) {
      InferenceTrace t;
      t.user_id = "u" + std::to_string(i);
      t.attribute = Attribute::Age;
      t.truth = classes[rng() % k];
      auto r = rng() % (k + 2);
      if (r < k) t.outcome.final_label = classes[r];
      else if (r == k) t.outcome.final_label = "unlisted";
      pairs.emplace_back(t.truth, t.outcome.final_label);
      traces.push_back(std::move(t));
    }
    auto m = score(traces);
    double diff = std::abs(m.weighted_f1 - test::brute_weighted_f1(pairs, m.classes));
    for (const auto& cm : m.metrics) {
      double tp = 0, fp = 0, fn = 0;
      for (const auto& [truth, pred] : pairs) {
        bool t = truth == cm.label, p = pred && *pred == cm.label;
        tp += t && p;
        fp += !t && p;
        fn += t && !p;
      }
      double precision = tp + fp == 0 ? 0 : tp / (tp + fp);
      double recall = tp + fn == 0 ? 0 : tp / (tp + fn);
      diff = std::max({diff, std::abs(cm.precision - precision), std::abs(cm.recall - recall),
                       std::abs(cm.f1 - test::brute_f1(pairs, cm.label))});
    }
    if (diff > worst) {
      worst = diff;
      worst_index = instances;
    }
  }
  return {worst <= kMetricTolerance, std::to_string(instances) + " instances, max deviation " +
                                         fmt(worst, 3) + " (instance " + std::to_string(worst_index) + ")"};
}

Result leak_curve_check(std::size_t m, std::size_t min_len, std::size_t max_len, bool exact) {
  SynthSpec spec;
  spec.n_users = 60;
  spec.seed = 5 + m;
  spec.messages = {min_len, max_len};
  spec.disclosure.mode = SynthSpec::Disclosure::Mode::EveryMth;
  spec.disclosure.m = m;
  auto corpus = generate(spec);
  llm::MockOracle mock;
  llm::LlmGateway gw(mock, quiet_gateway());
  std::vector<UserFlags> users;
  for (const auto& u : corpus.users) {
    const auto& chat = *u.stream(StreamKind::ChatAssistant);
    UserFlags f;
    f.length = chat.size();
    for (const auto& v : classify_safety(chat, gw))
      if (v.verdict == llm::Verdict::Unsafe) f.flagged_indices.push_back(v.message_index);
    users.push_back(std::move(f));
  }
  auto curve = leak_curve(users);
  bool ok = exact ? curve.r_squared == 1.0 : curve.r_squared >= kLinearR2;
  return {ok, "m=" + std::to_string(m) + " lengths " + std::to_string(min_len) + ".." +
                  std::to_string(max_len) + ": r_squared " + fmt(curve.r_squared, 17) +
                  (exact ? " (must equal 1)" : " (>= " + fmt(kLinearR2) + ")")};
}

Result ac5_m2() { return leak_curve_check(2, 20, 120, false); }
Result ac5_m4() { return leak_curve_check(4, 20, 120, false); }
Result ac5_m8() { return leak_curve_check(8, 20, 120, false); }
// Every message flagged; lengths are whole multiples of the 1% grid.
Result ac5_exact() { return leak_curve_check(1, 100, 100, true); }

Result ac6() {
  std::size_t mismatched = 0, checked = 0;
  for (auto id : llm::kAllTemplates) {
    std::optional<std::string_view> phrase;
    if (llm::has_source_slot(id)) phrase = llm::kGoogleSearchPhrase;
    auto rendered = llm::render(id, phrase, {}).text();
    ++checked;
    if (rendered != test::read_fixture("prompts/" + std::string(llm::template_name(id)) + ".txt"))
      ++mismatched;
  }
  std::size_t diff_failures = 0;
  for (auto id : llm::kAllTemplates) {
    if (!llm::has_source_slot(id)) continue;
    const std::string google = llm::render(id, llm::kGoogleSearchPhrase, {}).text();
    for (auto phrase : {llm::kYoutubeSearchPhrase, llm::kYoutubeWatchPhrase, llm::kConversationPhrase}) {
      std::string other = llm::render(id, phrase, {}).text();
      // Undo every occurrence of the substituted phrase; the rest must agree.
      std::string restored;
      std::size_t pos = 0, hits = 0;
      while (true) {
        auto at = other.find(phrase, pos);
        if (at == std::string::npos) break;
        restored += other.substr(pos, at - pos);
        restored += llm::kGoogleSearchPhrase;
        pos = at + phrase.size();
        ++hits;
      }
      restored += other.substr(pos);
      if (hits == 0 || restored != google) ++diff_failures;
    }
  }
  return {mismatched == 0 && diff_failures == 0,
          std::to_string(checked - mismatched) + "/" + std::to_string(checked) +
              " fixtures byte-identical, " + std::to_string(diff_failures) + " phrase-diff failures"};
}

Result ac7() {
  const std::vector<std::pair<std::string, llm::Verdict>> examples{
      {"My cat lungs are ruptured.", llm::Verdict::Safe},
      {"I am a single mom of two.", llm::Verdict::Unsafe},
      {"How do I pay my loan?", llm::Verdict::Safe},
      {"As a 25 year old woman, what should I do?", llm::Verdict::Unsafe}};
  llm::MockOracle mock;
  llm::LlmGateway gw(mock, quiet_gateway());
  std::vector<std::string> texts;
  for (const auto& e : examples) texts.push_back(e.first);
  auto verdicts = classify_safety(test::make_stream(texts), gw);
  std::size_t wrong = 0;
  std::string seen;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (verdicts[i].verdict != examples[i].second) ++wrong;
    seen += (i ? "/" : "") + std::string(llm::to_string(verdicts[i].verdict));
  }
  auto parsed = llm::parse_labeled("Reasoning: the user mentions Berlin.\nCountry: Germany", Attribute::Country);
  bool label_ok = parsed.label == std::optional<std::string>("germany");
  return {wrong == 0 && label_ok, "safety template examples " + seen + ", country label '" +
                                      parsed.label.value_or("<unparsed>") + "'"};
}

struct CliRun {
  int code;
  std::string err;
};

CliRun cli_stage(const test::TempDir& dir, const std::string& stage) {
  std::ostringstream out, err;
  int code = cli::run({"--config", (dir / "config.json").string(), "--out", (dir / "run").string(),
                       "--mock-oracle", stage},
                      out, err);
  return {code, err.str()};
}

nlohmann::json closure_config() {
  return {{"seed", 8},
          {"cohort", {{"mode", "absolute"}, {"value", 0}}},
          {"synth",
           {{"n_users", 80},
            {"seed", 8},
            {"disclosure", {{"mode", "first_index"}, {"user_fraction", 0.5}, {"rate_after", 0.1}}},
            {"cues", {{"attributes", {"Age", "Gender", "Country"}}, {"user_fraction", 1.0}}}}}};
}

std::vector<std::map<std::string, std::string>> read_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  auto header = split_csv_line(line);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    auto fields = split_csv_line(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < fields.size(); ++i) row[header[i]] = fields[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

Result ac8() {
  test::TempDir dir;
  write_file_atomic(dir / "config.json", closure_config().dump(2));
  for (const char* stage : {"synth", "filter", "cohort", "infer", "evaluate"}) {
    auto r = cli_stage(dir, stage);
    if (r.code != 0) return {false, std::string(stage) + " exited " + std::to_string(r.code) + ": " + r.err};
  }
  auto manifest = parse_manifest(nlohmann::json::parse(read_file(dir / "run/synth/manifest.json")));
  std::map<std::string, const PlantedUser*> by_id;
  for (const auto& m : manifest) by_id[m.user_id] = &m;

  // filter: UNSAFE verdicts and categories equal the plants
  std::size_t filter_wrong = 0;
  std::istringstream ann(read_file(dir / "run/filter/annotations.jsonl"));
  std::string line;
  while (std::getline(ann, line)) {
    if (line.empty()) continue;
    auto a = nlohmann::json::parse(line);
    const auto& m = *by_id.at(a["user_id"].get<std::string>());
    std::vector<std::size_t> unsafe;
    for (std::size_t i = 0; i < a["verdicts"].size(); ++i)
      if (a["verdicts"][i]["verdict"] == "UNSAFE") unsafe.push_back(i);
    std::vector<std::string> categories;
    for (const auto& c : a["categories"]) categories.push_back(c["category"]);
    if (unsafe != m.planted_indices || categories != m.planted_categories) ++filter_wrong;
  }

  // cohort: exactly the users with no plant
  std::size_t cohort_wrong = 0;
  std::vector<std::string> cohort;
  for (const auto& row : read_csv(dir / "run/cohort/manifest.csv")) {
    bool included = row.at("included") == "true";
    if (included != by_id.at(row.at("user_id"))->planted_indices.empty()) ++cohort_wrong;
    if (included) cohort.push_back(row.at("user_id"));
  }

  // infer: every cohort trace stops at the cue with the true label
  std::size_t infer_wrong = 0;
  auto traces = parse_traces(read_file(dir / "run/infer/traces.jsonl"));
  for (const auto& t : traces) {
    const auto& m = *by_id.at(t.user_id);
    auto truth = m.profile.label(t.attribute).value_or("");
    auto expected = derived_context(m.lengths.at(t.kind), m.cues.at(t.kind).at(t.attribute),
                                    PrefixSchedule::defaults());
    if (t.outcome.context_needed != expected || !t.outcome.final_label ||
        !labels_match(t.attribute, truth, *t.outcome.final_label))
      ++infer_wrong;
  }
  bool trace_count_ok = traces.size() == cohort.size() * 3;

  // evaluate: every weighted F1 is 1
  auto summary = nlohmann::json::parse(read_file(dir / "run/evaluate/summary.json"));
  std::size_t perfect = 0, scored = 0;
  for (const auto& row : read_csv(dir / "run/evaluate/platform_table.csv")) {
    for (const auto& [col, value] : row) {
      if (col == "attribute" || value.empty()) continue;
      ++scored;
      if (value == "1*" || value == "1") ++perfect;
    }
  }
  bool ok = filter_wrong == 0 && cohort_wrong == 0 && infer_wrong == 0 && trace_count_ok &&
            !cohort.empty() && scored > 0 && perfect == scored;
  return {ok, std::to_string(manifest.size()) + " users: filter " + std::to_string(filter_wrong) +
                  " wrong, cohort " + std::to_string(cohort.size()) + " kept / " +
                  std::to_string(cohort_wrong) + " wrong, " + std::to_string(traces.size()) +
                  " traces / " + std::to_string(infer_wrong) + " wrong, " + std::to_string(perfect) +
                  "/" + std::to_string(scored) + " platform cells at F1 1"};
}

Result ac9() {
  test::TempDir dir;
  write_file_atomic(dir / "config.json", closure_config().dump(2));
  for (const char* stage : {"synth", "filter", "cohort", "infer"}) {
    auto r = cli_stage(dir, stage);
    if (r.code != 0) return {false, std::string(stage) + " exited " + std::to_string(r.code) + ": " + r.err};
  }
  auto first = read_file(dir / "run/infer/traces.jsonl");
  auto first_calls =
      nlohmann::json::parse(read_file(dir / "run/infer/summary.json"))["oracle"]["endpoint_calls"].get<std::size_t>();
  auto r = cli_stage(dir, "infer");
  if (r.code != 0) return {false, "second infer exited " + std::to_string(r.code)};
  auto second = read_file(dir / "run/infer/traces.jsonl");
  auto oracle = nlohmann::json::parse(read_file(dir / "run/infer/summary.json"))["oracle"];
  auto calls = oracle["endpoint_calls"].get<std::size_t>();
  bool ok = calls == 0 && first_calls > 0 && first == second;
  return {ok, "cold run " + std::to_string(first_calls) + " calls, warm run " + std::to_string(calls) +
                  " calls / " + oracle["cache_hits"].dump() + " cache hits, traces " +
                  (first == second ? "byte-identical" : "differ")};
}

const std::vector<std::pair<std::string, std::function<Result()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Result()>>> list{
      {"AC1.age", ac1_age},   {"AC1.gender", ac1_gender}, {"AC1.country", ac1_country},
      {"AC2", ac2},           {"AC3", ac3},               {"AC4", ac4},
      {"AC5.m2", ac5_m2},     {"AC5.m4", ac5_m4},         {"AC5.m8", ac5_m8},
      {"AC5.exact", ac5_exact}, {"AC6", ac6},             {"AC7", ac7},
      {"AC8", ac8},           {"AC9", ac9}};
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0, ran = 0;
  for (const auto& [name, check] : criteria()) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    ++ran;
    Result r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = {false, std::string("threw: ") + e.what()};
    }
    std::cout << (r.pass ? "PASS " : "FAIL ") << name << ": " << r.detail << std::endl;
    if (!r.pass) ++failures;
  }
  if (ran == 0) {
    std::cerr << "unknown criterion\n";
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
