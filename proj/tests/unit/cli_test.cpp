#include <doctest.h>

#include <sstream>

#include "cli.hpp"
#include "leakscope/audit.hpp"
#include "leakscope/csv.hpp"
#include "leakscope/llm/mock_oracle.hpp"
#include "leakscope/synth.hpp"
#include "support.hpp"

using namespace leakscope;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path write_config(const test::TempDir& dir, const nlohmann::json& j) {
  auto path = dir / "config.json";
  write_file_atomic(path, j.dump(2));
  return path;
}

nlohmann::json small_synth() {
  return {{"synth", {{"n_users", 20}, {"seed", 3}}}};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("synth, filter and audit reproduce planted discovery points") {
    test::TempDir dir;
    auto cfg = write_config(dir, small_synth()).string();
    auto run = (dir / "run").string();
    for (const char* stage : {"synth", "filter", "audit"}) {
      auto r = run_cli({"--config", cfg, "--out", run, "--mock-oracle", stage});
      INFO(stage << ": " << r.err);
      REQUIRE(r.code == 0);
    }
    auto manifest = parse_manifest(nlohmann::json::parse(read_file(dir / "run/synth/manifest.json")));
    auto csv = read_file(dir / "run/audit/discovery.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    std::size_t i = 0;
    while (std::getline(lines, line)) {
      auto f = split_csv_line(line);
      REQUIRE(i < manifest.size());
      const auto& m = manifest[i++];
      CHECK(f[0] == m.user_id);
      auto first = m.first_flag_index();
      auto expected = discovery_point(m.planted_indices, m.lengths.at(StreamKind::ChatAssistant));
      if (first) CHECK(f[3] == format_number(*expected));
      else CHECK(f[3] == "absent");
    }
    CHECK(i == manifest.size());
    CHECK(std::filesystem::exists(dir / "run/audit/STAGE.json"));
    CHECK(std::filesystem::exists(dir / "run/ledger.jsonl"));
  }

  TEST_CASE("evaluate before infer is a stage order error") {
    test::TempDir dir;
    auto r = run_cli({"--out", (dir / "run").string(), "--mock-oracle", "evaluate"});
    CHECK(r.code == cli::kStageOrder);
    CHECK(r.err.find("infer") != std::string::npos);
  }

  TEST_CASE("bad configuration exits with the config code") {
    test::TempDir dir;
    auto cfg = write_config(dir, {{"cohort", {{"percentile", 150}}}}).string();
    auto r = run_cli({"--config", cfg, "--out", (dir / "run").string(), "validate-config"});
    CHECK(r.code == cli::kConfigError);
    CHECK(r.err.find("cohort.percentile") != std::string::npos);
    auto unknown = write_config(dir, {{"endpoint", {{"modle", "x"}}}}).string();
    CHECK(run_cli({"--config", unknown, "validate-config"}).code == cli::kConfigError);
    CHECK(run_cli({"--config", (dir / "missing.json").string(), "validate-config"}).code ==
          cli::kConfigError);
  }

  TEST_CASE("show-defaults prints every section") {
    auto r = run_cli({"validate-config", "--show-defaults"});
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    for (const char* key : {"corpus", "endpoint", "audit", "cohort", "inference", "evaluation", "synth"})
      CHECK(j.contains(key));
    CHECK(j["endpoint"]["api_key_env"] == "LEAKSCOPE_API_KEY");
  }

  TEST_CASE("exhausted oracle exits with the oracle code") {
    test::TempDir dir;
    auto u = test::make_user("u1", 4);
    u.streams[StreamKind::ChatAssistant].messages[1].text = "((mock:error))";
    std::vector<UserRecord> users{u};
    write_corpus(dir / "corpus.jsonl", users);
    auto cfg = write_config(dir, {{"corpus", {{"source", "file"}, {"file", (dir / "corpus.jsonl").string()}}},
                                  {"endpoint", {{"max_attempts", 1}, {"initial_backoff_ms", 1}}}})
                   .string();
    auto r = run_cli({"--config", cfg, "--out", (dir / "run").string(), "--mock-oracle", "filter"});
    CHECK(r.code == cli::kOracleExhausted);
  }

  TEST_CASE("second infer run makes no endpoint calls") {
    test::TempDir dir;
    auto cfg = write_config(dir, small_synth()).string();
    auto run = (dir / "run").string();
    for (const char* stage : {"synth", "filter", "cohort", "infer"})
      REQUIRE(run_cli({"--config", cfg, "--out", run, "--mock-oracle", stage}).code == 0);
    auto first = read_file(dir / "run/infer/traces.jsonl");
    REQUIRE(run_cli({"--config", cfg, "--out", run, "--mock-oracle", "infer"}).code == 0);
    auto summary = nlohmann::json::parse(read_file(dir / "run/infer/summary.json"));
    CHECK(summary["oracle"]["endpoint_calls"] == 0);
    CHECK(summary["oracle"]["cache_hits"].get<std::size_t>() > 0);
    CHECK(read_file(dir / "run/infer/traces.jsonl") == first);
    CHECK(run_cli({"--config", cfg, "--out", run, "--mock-oracle", "evaluate"}).code == 0);
    CHECK(run_cli({"--config", cfg, "--out", run, "report"}).code == 0);
    CHECK(std::filesystem::exists(dir / "run/report/index.html"));
  }
}
