#include <doctest.h>

#include <random>
#include <set>

#include "leakscope/cohort.hpp"
#include "leakscope/errors.hpp"
#include "support.hpp"

using namespace leakscope;
using llm::Verdict;

namespace {

std::map<std::string, std::vector<Verdict>> all_safe(const std::vector<UserRecord>& users) {
  std::map<std::string, std::vector<Verdict>> v;
  for (const auto& u : users) v[u.user_id].assign(u.stream(StreamKind::ChatAssistant)->size(), Verdict::Safe);
  return v;
}

}  // namespace

TEST_SUITE("cohort") {
  TEST_CASE("nearest-rank percentile") {
    std::vector<std::size_t> v{15, 20, 35, 40, 50};
    CHECK(nearest_rank(v, 30) == 20);
    CHECK(nearest_rank(v, 40) == 20);
    CHECK(nearest_rank(v, 50) == 35);
    CHECK(nearest_rank(v, 5) == 15);
    CHECK(nearest_rank(v, 99) == 50);
    std::vector<std::size_t> ten{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(nearest_rank(ten, 10) == 1);
    CHECK_THROWS_AS(nearest_rank({}, 10), NoData);
  }

  TEST_CASE("length floor and unsafe exclusion") {
    std::vector<UserRecord> users{test::make_user("a", 3), test::make_user("b", 10),
                                  test::make_user("c", 12), test::make_user("d", 20)};
    auto verdicts = all_safe(users);
    verdicts["c"][4] = Verdict::Unsafe;
    verdicts["d"][0] = Verdict::Unresolved;
    auto r = build_cohort(users, verdicts, CohortRule::absolute(5));
    CHECK(r.threshold == 5);
    CHECK(r.included_ids() == std::vector<std::string>{"b"});
    CHECK(r.entries[0].reasons == std::vector<std::string>{"length_floor"});
    CHECK(r.entries[2].reasons == std::vector<std::string>{"unsafe_message"});
    CHECK(r.entries[3].reasons == std::vector<std::string>{"unresolved_verdict"});
    auto lax = build_cohort(users, verdicts, CohortRule::absolute(5, false));
    CHECK(lax.included_ids() == std::vector<std::string>{"b", "c", "d"});
  }

  TEST_CASE("percentile rule excludes users at the threshold") {
    std::vector<UserRecord> users;
    for (std::size_t i = 1; i <= 10; ++i) users.push_back(test::make_user("u" + std::to_string(i), i * 10));
    auto r = build_cohort(users, all_safe(users), CohortRule::percentile(10));
    CHECK(r.threshold == 10);
    CHECK(r.excluded_ids() == std::vector<std::string>{"u1"});
  }

  TEST_CASE("included and excluded partition the input") {
    std::mt19937 rng(11);
    for (int t = 0; t < 50; ++t) {
      std::vector<UserRecord> users;
      for (int i = 0; i < 30; ++i) users.push_back(test::make_user("u" + std::to_string(i), 1 + rng() % 40));
      auto verdicts = all_safe(users);
      for (auto& [id, v] : verdicts)
        if (rng() % 4 == 0) v[rng() % v.size()] = Verdict::Unsafe;
      auto r = build_cohort(users, verdicts, CohortRule::percentile(1 + rng() % 98));
      auto in = r.included_ids();
      auto out = r.excluded_ids();
      CHECK(in.size() + out.size() == users.size());
      std::set<std::string> all(in.begin(), in.end());
      all.insert(out.begin(), out.end());
      CHECK(all.size() == users.size());
      for (const auto& e : r.entries) CHECK(e.included == e.reasons.empty());
    }
  }

  TEST_CASE("raising the threshold never adds users") {
    std::mt19937 rng(5);
    std::vector<UserRecord> users;
    for (int i = 0; i < 40; ++i) users.push_back(test::make_user("u" + std::to_string(i), 1 + rng() % 60));
    auto verdicts = all_safe(users);
    std::set<std::string> previous;
    for (std::size_t n = 0; n <= 60; n += 3) {
      auto ids = build_cohort(users, verdicts, CohortRule::absolute(n)).included_ids();
      std::set<std::string> now(ids.begin(), ids.end());
      if (n > 0)
        for (const auto& id : now) CHECK(previous.count(id) == 1);
      previous = now;
    }
  }

  TEST_CASE("missing verdicts and invalid rules") {
    std::vector<UserRecord> users{test::make_user("a", 3)};
    std::map<std::string, std::vector<Verdict>> v{{"a", {Verdict::Safe}}};
    CHECK_THROWS_AS(build_cohort(users, v, CohortRule::absolute(1)), MissingVerdicts);
    CHECK_THROWS_AS(CohortRule::percentile(0).validate(), ConfigError);
    CHECK_THROWS_AS(CohortRule::percentile(100).validate(), ConfigError);
  }

  TEST_CASE("csv round trip") {
    std::vector<UserRecord> users{test::make_user("a", 3), test::make_user("b, c", 10)};
    auto verdicts = all_safe(users);
    verdicts["b, c"][1] = Verdict::Unsafe;
    auto r = build_cohort(users, verdicts, CohortRule::absolute(5));
    auto back = parse_cohort_csv(r.to_csv());
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[1].user_id == "b, c");
    CHECK(back.entries[1].chat_length == 10);
    CHECK(back.entries[1].reasons == r.entries[1].reasons);
    CHECK(back.included_ids() == r.included_ids());
  }
}
