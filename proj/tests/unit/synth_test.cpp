#include <doctest.h>

#include "leakscope/audit.hpp"
#include "leakscope/disclosure_filter.hpp"
#include "leakscope/entity_flagger.hpp"
#include "leakscope/errors.hpp"
#include "leakscope/llm/gateway.hpp"
#include "leakscope/llm/mock_oracle.hpp"
#include "leakscope/synth.hpp"

using namespace leakscope;

namespace {

SynthSpec small_spec() {
  SynthSpec s;
  s.n_users = 12;
  s.seed = 9;
  s.disclosure.mode = SynthSpec::Disclosure::Mode::FirstIndex;
  s.disclosure.rate_after = 0.2;
  s.cues.attributes = {Attribute::Age, Attribute::Gender, Attribute::Country};
  return s;
}

std::string spec_error(nlohmann::json j) {
  try {
    SynthSpec::from_json(j).validate();
  } catch (const SpecInvalid& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("same seed, same corpus") {
    auto a = generate(small_spec());
    auto b = generate(small_spec());
    CHECK(serialize_corpus(a.users) == serialize_corpus(b.users));
    CHECK(a.manifest_json() == b.manifest_json());
    auto other = small_spec();
    other.seed = 10;
    CHECK(serialize_corpus(generate(other).users) != serialize_corpus(a.users));
  }

  TEST_CASE("zero users is an empty corpus") {
    auto s = small_spec();
    s.n_users = 0;
    auto c = generate(s);
    CHECK(c.users.empty());
    CHECK(c.manifest.empty());
  }

  TEST_CASE("generated users validate and match the manifest") {
    auto c = generate(small_spec());
    REQUIRE(c.users.size() == 12);
    for (std::size_t i = 0; i < c.users.size(); ++i) {
      const auto& u = c.users[i];
      const auto& m = c.manifest[i];
      CHECK(validate_user(u).empty());
      CHECK(u.user_id == m.user_id);
      CHECK(u.profile == m.profile);
      auto n = u.stream(StreamKind::ChatAssistant)->size();
      CHECK(n >= 20);
      CHECK(n <= 60);
      CHECK(m.lengths.at(StreamKind::ChatAssistant) == n);
      CHECK(std::is_sorted(m.planted_indices.begin(), m.planted_indices.end()));
      CHECK(m.planted_categories.size() == m.planted_indices.size());
    }
    auto back = parse_manifest(c.manifest_json());
    CHECK(back.size() == c.manifest.size());
    CHECK(back[3].planted_indices == c.manifest[3].planted_indices);
  }

  TEST_CASE("planted disclosures are exactly what the filter finds") {
    auto spec = small_spec();
    spec.disclosure.mode = SynthSpec::Disclosure::Mode::EveryMth;
    spec.disclosure.m = 5;
    spec.disclosure.offset = 2;
    auto c = generate(spec);
    llm::MockOracle mock;
    llm::LlmGateway gw(mock, {});
    for (std::size_t i = 0; i < c.users.size(); ++i) {
      auto verdicts = classify_safety(*c.users[i].stream(StreamKind::ChatAssistant), gw);
      std::vector<std::size_t> unsafe;
      for (const auto& v : verdicts)
        if (v.verdict == llm::Verdict::Unsafe) unsafe.push_back(v.message_index);
      CHECK(unsafe == c.manifest[i].planted_indices);
      REQUIRE_FALSE(unsafe.empty());
      CHECK(unsafe.front() == 2);
    }
  }

  TEST_CASE("fillers are safe, entity-free and lowercase") {
    for (auto kind : kAllStreamKinds) {
      for (auto f : filler_pool(kind)) {
        CHECK(GazetteerFlagger::builtin().find(f).empty());
        std::vector<std::string> payload{std::string(f)};
        CHECK(llm::MockOracle::respond(llm::render(llm::TemplateId::Safety, std::nullopt, payload).text()) == "SAFE");
        CHECK(f.find("((") == std::string_view::npos);
      }
    }
    CHECK_FALSE(disclosure_sentences().empty());
  }

  TEST_CASE("invalid specs name the offending field") {
    nlohmann::json base = small_spec().to_json();
    auto j = base;
    j["messages"]["min"] = 0;
    CHECK(spec_error(j).rfind("messages", 0) == 0);
    j = base;
    j["disclosure"]["user_fraction"] = 1.5;
    CHECK(spec_error(j).find("disclosure.user_fraction") != std::string::npos);
    j = base;
    j["messages"]["min"] = 70;
    CHECK_FALSE(spec_error(j).empty());
    j = base;
    j["demographics"] = {{"Gender", {{"Robot", 1.0}}}};
    CHECK(spec_error(j).find("demographics") != std::string::npos);
    CHECK(spec_error(base).empty());
  }

  TEST_CASE("spec json round trip") {
    auto s = small_spec();
    CHECK(SynthSpec::from_json(s.to_json()).to_json() == s.to_json());
  }
}
