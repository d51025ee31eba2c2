#include <doctest.h>

#include "leakscope/disclosure_filter.hpp"
#include "leakscope/entity_flagger.hpp"
#include "leakscope/errors.hpp"
#include "leakscope/llm/gateway.hpp"
#include "leakscope/llm/mock_oracle.hpp"
#include "leakscope/taxonomy.hpp"
#include "support.hpp"

using namespace leakscope;

namespace {

llm::GatewayOptions fast() {
  llm::GatewayOptions o;
  o.retry.initial_backoff = std::chrono::milliseconds(1);
  o.retry.max_backoff = std::chrono::milliseconds(1);
  o.retry.max_attempts = 2;
  return o;
}

class ThrowingFlagger final : public EntityFlagger {
 public:
  std::vector<EntityMatch> find(std::string_view) const override { throw FlaggerError("offline"); }
};

}  // namespace

TEST_SUITE("disclosure_filter") {
  TEST_CASE("place names are flagged as GPE") {
    auto flags = flag_entities(test::make_stream({"I live in Lagos and work nearby"}),
                               GazetteerFlagger::builtin());
    REQUIRE(flags.size() == 1);
    CHECK(flags[0] == EntityFlag{0, EntityKind::GPE, "Lagos"});
  }

  TEST_CASE("generic technical question yields no flag") {
    CHECK(flag_entities(test::make_stream({"how to sort a list"}), GazetteerFlagger::builtin()).empty());
  }

  TEST_CASE("non-English messages are gated out") {
    EnglishGate gate;
    const std::string pt = "Eu moro em Lagos com a minha família desde o ano passado";
    CHECK_FALSE(gate.is_english(pt));
    CHECK(gate.is_english("I live in Lagos with my family since last year"));
    CHECK(flag_entities(test::make_stream({pt}), GazetteerFlagger::builtin(), gate).empty());
  }

  TEST_CASE("longest gazetteer match wins and boundaries are respected") {
    GazetteerFlagger g("GPE\tNew York\nGPE\tYork\nNORP\tIndian\n", false);
    auto m = g.find("Visiting New York's museums");
    REQUIRE(m.size() == 1);
    CHECK(m[0].surface == "New York");
    CHECK(m[0].offset == 9);
    CHECK(g.find("Yorkshire pudding").empty());
    CHECK(g.find("Indian food")[0].kind == EntityKind::NORP);
  }

  TEST_CASE("capitalized sequences become persons or organizations") {
    GazetteerFlagger g("", true);
    auto person = g.find("yesterday I met Maria Gonzalez at lunch");
    REQUIRE(person.size() == 1);
    CHECK(person[0].kind == EntityKind::PERSON);
    CHECK(person[0].surface == "Maria Gonzalez");
    auto org = g.find("she works at Acme Widgets Inc");
    REQUIRE(org.size() == 1);
    CHECK(org[0].kind == EntityKind::ORG);
  }

  TEST_CASE("flagger failure names the message") {
    ThrowingFlagger bad;
    try {
      flag_entities(test::make_stream({"a", "b"}), bad);
      FAIL("expected FlaggerError");
    } catch (const FlaggerError& e) {
      CHECK(std::string(e.what()).find("message 0") != std::string::npos);
    }
  }

  TEST_CASE("safety examples under the mock oracle") {
    llm::MockOracle mock;
    llm::LlmGateway gw(mock, fast());
    auto stream = test::make_stream({"My cat lungs are ruptured.", "I am a single mom of two.",
                                     "How do I pay my loan?",
                                     "As a 25 year old woman, what should I do?"});
    auto v = classify_safety(stream, gw);
    REQUIRE(v.size() == 4);
    CHECK(v[0].verdict == llm::Verdict::Safe);
    CHECK(v[1].verdict == llm::Verdict::Unsafe);
    CHECK(v[2].verdict == llm::Verdict::Safe);
    CHECK(v[3].verdict == llm::Verdict::Unsafe);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i].message_index == i);
  }

  TEST_CASE("exhausted oracle leaves an unresolved verdict") {
    llm::MockOracle mock;
    llm::LlmGateway gw(mock, fast());
    auto v = classify_safety(test::make_stream({"fine", "((mock:error))"}), gw);
    CHECK(v[0].verdict == llm::Verdict::Safe);
    CHECK(v[1].verdict == llm::Verdict::Unresolved);
    CHECK(v[1].error.has_value());
  }

  TEST_CASE("categories only for unsafe messages, canonicalized") {
    test::ScriptedEndpoint ep([](const llm::Prompt& p) -> std::string {
      auto t = p.text();
      if (t.find("single mom") != std::string::npos) return "Personal Data Type: **Family Life and Relationship**";
      if (t.find("mystery") != std::string::npos) return "Favourite colours";
      return "Age";
    });
    llm::LlmGateway gw(ep, fast());
    auto stream = test::make_stream({"hello", "I am a single mom of two.", "mystery", "25 year old"});
    std::vector<SafetyVerdict> verdicts = {{0, llm::Verdict::Safe, "SAFE", {}},
                                           {1, llm::Verdict::Unsafe, "UNSAFE", {}},
                                           {2, llm::Verdict::Unsafe, "UNSAFE", {}},
                                           {3, llm::Verdict::Unresolved, "", {}}};
    auto r = classify_category(stream, verdicts, gw);
    CHECK(ep.calls() == 2);
    REQUIRE(r.labels.size() == 1);
    CHECK(r.labels[0].message_index == 1);
    CHECK(r.labels[0].category == "Family life and relationships");
    REQUIRE(r.unknown.size() == 1);
    CHECK(r.unknown[0].message_index == 2);
    CHECK(r.unknown[0].raw == "Favourite colours");
    CHECK(r.failed.empty());
  }

  TEST_CASE("taxonomy has twenty names and matches exact spellings") {
    CHECK(category_names().size() == 20);
    for (auto name : category_names()) CHECK(match_category(name) == name);
    CHECK(match_category("wealth details salary") == std::optional<std::string_view>("Wealth, salary"));
    CHECK_FALSE(match_category("Hobbies").has_value());
  }
}
