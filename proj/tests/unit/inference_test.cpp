#include <doctest.h>

#include "leakscope/errors.hpp"
#include "leakscope/inference.hpp"
#include "leakscope/llm/gateway.hpp"
#include "leakscope/llm/mock_oracle.hpp"
#include "support.hpp"

using namespace leakscope;

namespace {

UserRecord cued_user(const std::string& id, std::size_t n, std::optional<std::size_t> cue_at,
                     const std::string& gender = "Male") {
  auto u = test::make_user(id, n, "25-34", gender, "India");
  if (cue_at) {
    auto& msg = u.streams[StreamKind::ChatAssistant].messages[*cue_at];
    msg.text += " " + llm::cue_token(Attribute::Gender, gender);
  }
  return u;
}

}  // namespace

TEST_SUITE("inference_protocol") {
  TEST_CASE("prefix lengths") {
    CHECK(prefix_length(20, 5) == 1);
    CHECK(prefix_length(20, 50) == 10);
    CHECK(prefix_length(20, 100) == 20);
    CHECK(prefix_length(7, 5) == 1);
    CHECK(prefix_length(7, 15) == 2);
    CHECK(prefix_length(1, 5) == 1);
    for (std::size_t n = 1; n < 300; ++n) {
      std::size_t prev = 0;
      for (int k : PrefixSchedule::defaults().percentages) {
        auto len = prefix_length(n, k);
        CHECK(len >= 1);
        CHECK(len >= prev);
        prev = len;
      }
      CHECK(prev == n);
    }
    CHECK_THROWS_AS(prefix_slice(MessageStream{}, 10), EmptyStream);
    auto s = prefix_slice(test::make_stream({"a", "b", "c", "d"}), 50);
    CHECK(s.size() == 2);
  }

  TEST_CASE("schedule validation") {
    CHECK(PrefixSchedule::defaults().percentages.size() == 20);
    CHECK_THROWS_AS((PrefixSchedule{{10, 5, 100}}).validate(), ConfigError);
    CHECK_THROWS_AS((PrefixSchedule{{10, 50}}).validate(), ConfigError);
    CHECK_NOTHROW((PrefixSchedule{{50, 100}}).validate());
  }

  TEST_CASE("context needed follows the cue position") {
    llm::MockOracle mock;
    llm::LlmGateway gw(mock, {});
    auto first = run_trace(cued_user("a", 20, 0), Attribute::Gender, StreamKind::ChatAssistant, gw);
    CHECK(first.outcome.context_needed == 5);
    CHECK(first.steps.size() == 1);
    auto mid = run_trace(cued_user("b", 20, 9), Attribute::Gender, StreamKind::ChatAssistant, gw);
    CHECK(mid.outcome.context_needed == 50);
    CHECK(mid.steps.size() == 10);
    CHECK(mid.steps.front().label == "female");
    CHECK(mid.outcome.final_label == "male");
  }

  TEST_CASE("never matching gives NotReached after every step") {
    llm::MockOracle mock;
    llm::LlmGateway gw(mock, {});
    auto t = run_trace(cued_user("c", 20, std::nullopt), Attribute::Gender, StreamKind::ChatAssistant, gw);
    CHECK_FALSE(t.outcome.context_needed.has_value());
    CHECK(t.steps.size() == 20);
    CHECK(t.outcome.final_label == "female");
    auto j = to_json(t);
    CHECK(j["outcome"]["context_needed"] == "NotReached");
    auto back = trace_from_json(j);
    CHECK(to_json(back) == j);
  }

  TEST_CASE("run_trace errors") {
    llm::MockOracle mock;
    llm::LlmGateway gw(mock, {});
    auto u = test::make_user("d", 5);
    CHECK_THROWS_AS(run_trace(u, Attribute::Religion, StreamKind::ChatAssistant, gw), MissingGroundTruth);
    CHECK_THROWS_AS(run_trace(u, Attribute::Gender, StreamKind::WebSearch, gw), MissingStream);
    u.streams[StreamKind::WebSearch] = test::make_stream({"q"}, StreamKind::WebSearch);
    CHECK_THROWS_AS(run_trace(u, Attribute::Country, StreamKind::WebSearch, gw), UnsupportedKind);
    u.streams[StreamKind::ChatAssistant].messages.clear();
    CHECK_THROWS_AS(run_trace(u, Attribute::Gender, StreamKind::ChatAssistant, gw), EmptyStream);
  }

  TEST_CASE("country labels match through aliases") {
    CHECK(labels_match(Attribute::Country, "united states", "USA"));
    CHECK(labels_match(Attribute::Gender, "male", "Male"));
    CHECK_FALSE(labels_match(Attribute::Age, "25-34", "18-24"));
  }

  TEST_CASE("matrix skips what cannot be queried") {
    llm::MockOracle mock;
    llm::LlmGateway gw(mock, {});
    auto extended = test::make_user("x", 10);
    extended.profile.religion = "hindu";
    auto no_stream = test::make_user("y", 10);
    no_stream.streams.clear();
    std::vector<UserRecord> users{test::make_user("a", 10), extended, no_stream};
    auto r = run_matrix(users, {}, gw);
    CHECK(r.traces.size() == 5);
    CHECK(r.skipped.size() == 4);
    CHECK(r.traces[0].key() == "a|Age|ChatAssistant");
    CHECK(r.failed.empty());
  }

  TEST_CASE("journal resume reuses finished traces") {
    test::TempDir dir;
    std::vector<UserRecord> users{cued_user("a", 20, 3), cued_user("b", 20, 15)};
    MatrixOptions opts;
    opts.attributes = {Attribute::Gender};
    opts.journal = dir / "journal.jsonl";
    llm::MockOracle first_mock;
    llm::LlmGateway first(first_mock, {});
    auto r1 = run_matrix(users, opts, first);
    CHECK(r1.resumed == 0);

    llm::MockOracle second_mock;
    llm::LlmGateway second(second_mock, {});
    auto r2 = run_matrix(users, opts, second);
    CHECK(r2.resumed == 2);
    CHECK(second_mock.calls() == 0);
    CHECK(serialize_traces(r1.traces) == serialize_traces(r2.traces));
    CHECK(parse_traces(serialize_traces(r1.traces)).size() == 2);
  }
}
