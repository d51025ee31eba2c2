#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "leakscope/errors.hpp"
#include "leakscope/evaluation.hpp"
#include "oracles.hpp"

using namespace leakscope;

namespace {

using Pairs = std::vector<std::pair<std::string, std::optional<std::string>>>;

InferenceTrace trace(const std::string& user, Attribute a, const std::string& truth,
                     std::optional<std::string> label, std::optional<int> context,
                     StreamKind kind = StreamKind::ChatAssistant, const std::string& rationale = "") {
  InferenceTrace t;
  t.user_id = user;
  t.attribute = a;
  t.kind = kind;
  t.truth = truth;
  t.outcome.context_needed = context;
  t.outcome.final_label = std::move(label);
  t.outcome.rationale_at_stopping = rationale;
  return t;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("hand-computed two-class matrix") {
    Pairs pairs{{"a", "a"}, {"a", "b"}, {"b", "b"}};
    auto m = score_pairs({"a", "b"}, pairs);
    CHECK(m.counts == std::vector<std::vector<std::size_t>>{{1, 1, 0}, {0, 1, 0}});
    CHECK(m.metrics[0].precision == doctest::Approx(1.0));
    CHECK(m.metrics[0].recall == doctest::Approx(0.5));
    CHECK(m.metrics[1].precision == doctest::Approx(0.5));
    CHECK(m.metrics[1].recall == doctest::Approx(1.0));
    CHECK(m.metrics[0].f1 == doctest::Approx(2.0 / 3.0));
    CHECK(m.weighted_f1 == doctest::Approx(2.0 / 3.0));
    CHECK(m.total == 3);
  }

  TEST_CASE("out-of-set and unparsed predictions land in other") {
    Pairs pairs{{"a", "zebra"}, {"a", std::nullopt}, {"b", "b"}};
    auto m = score_pairs({"a", "b"}, pairs);
    CHECK(m.column_labels().back() == "other");
    CHECK(m.counts[0][2] == 2);
    CHECK(m.other_detail[0].at("other:zebra") == 1);
    CHECK(m.other_detail[0].at("other:unparsed") == 1);
    CHECK(m.metrics[0].f1 == 0.0);
    CHECK(m.metrics[1].f1 == 1.0);
    CHECK(m.weighted_f1 == doctest::Approx(1.0 / 3.0));
    CHECK(m.to_csv().find("other:zebra") != std::string::npos);
    CHECK_THROWS_AS(score_pairs({"a"}, {}), EmptyInput);
  }

  TEST_CASE("weighted F1 agrees with brute force on random instances") {
    std::mt19937 rng(17);
    for (int t = 0; t < 300; ++t) {
      std::size_t k = 2 + rng() % 5;
      std::vector<std::string> classes;
      for (std::size_t i = 0; i < k; ++i) classes.push_back("c" + std::to_string(i));
      Pairs pairs;
      std::size_t n = 1 + rng() % 60;
      for (std::size_t i = 0; i < n; ++i) {
        std::optional<std::string> pred;
        auto r = rng() % (k + 2);
        if (r < k) pred = classes[r];
        else if (r == k) pred = "elsewhere";
        pairs.emplace_back(classes[rng() % k], pred);
      }
      auto m = score_pairs(classes, pairs);
      CHECK(std::abs(m.weighted_f1 - test::brute_weighted_f1(pairs, classes)) <= 1e-12);
    }
  }

  TEST_CASE("majority baseline is invariant under permutation") {
    std::vector<std::size_t> s{5, 3, 2};
    auto base = majority_baseline(s);
    CHECK(base == doctest::Approx(0.5 * (2.0 * 0.5 / 1.5)));
    std::sort(s.begin(), s.end());
    do {
      CHECK(majority_baseline(s) == doctest::Approx(base).epsilon(1e-12));
    } while (std::next_permutation(s.begin(), s.end()));
  }

  TEST_CASE("score uses the attribute's label set") {
    std::vector<InferenceTrace> traces{trace("u1", Attribute::Gender, "male", "male", 5),
                                       trace("u2", Attribute::Gender, "female", "male", std::nullopt)};
    auto m = score(traces);
    CHECK(std::find(m.classes.begin(), m.classes.end(), "male") != m.classes.end());
    CHECK(m.total == 2);
    traces.push_back(trace("u3", Attribute::Age, "25-34", "25-34", 5));
    CHECK_THROWS_AS(score(traces), Error);
  }

  TEST_CASE("NotReached counts as one hundred") {
    std::vector<InferenceTrace> traces{trace("u1", Attribute::Age, "25-34", "25-34", 5),
                                       trace("u2", Attribute::Age, "25-34", "45+", std::nullopt)};
    auto s = context_stats(traces, ContextGroup::Attribute).at("Age");
    CHECK(s.mean == doctest::Approx(52.5));
    CHECK(s.median == doctest::Approx(52.5));
    CHECK(s.not_reached == 1);
    CHECK(s.matched_mean == doctest::Approx(5.0));
    CHECK(s.histogram.at(5) == 1);
    auto by_class = context_stats(traces, ContextGroup::Class);
    CHECK(by_class.count("Age:25-34") == 1);
    CHECK(context_stats(traces, ContextGroup::Kind).count("ChatAssistant") == 1);
  }

  TEST_CASE("platform table marks every tied best") {
    std::map<std::pair<Attribute, StreamKind>, double> f1{
        {{Attribute::Age, StreamKind::ChatAssistant}, 0.5},
        {{Attribute::Age, StreamKind::WebSearch}, 0.5},
        {{Attribute::Age, StreamKind::VideoWatch}, 0.25},
        {{Attribute::Gender, StreamKind::ChatAssistant}, 0.75}};
    auto t = platform_table(f1);
    CHECK(t.rows.size() == 2);
    CHECK(t.columns.size() == 3);
    CHECK(t.best[0][0]);
    CHECK(t.best[0][1]);
    CHECK_FALSE(t.best[0][2]);
    CHECK_FALSE(t.f1[1][1].has_value());
    auto csv = t.to_csv();
    CHECK(csv.find("0.5*") != std::string::npos);
    CHECK(csv.find("0.25*") == std::string::npos);
  }

  TEST_CASE("keyword occurrences in stopping rationales") {
    std::vector<InferenceTrace> traces{
        trace("u1", Attribute::Gender, "male", "male", 5, StreamKind::ChatAssistant,
              "Very technical questions in a male-dominated field. Technical again."),
        trace("u2", Attribute::Age, "25-34", "25-34", 5, StreamKind::ChatAssistant, "professional tone")};
    auto k = keyword_counts(traces);
    auto idx = [&](const std::string& w) {
      return static_cast<std::size_t>(std::find(k.keywords.begin(), k.keywords.end(), w) - k.keywords.begin());
    };
    CHECK(k.per_attribute.at(Attribute::Gender)[idx("technical")] == 2);
    CHECK(k.per_attribute.at(Attribute::Gender)[idx("male-dominated")] == 1);
    CHECK(k.per_attribute.at(Attribute::Age)[idx("professional tone")] == 1);
    CHECK(k.per_attribute.at(Attribute::Age)[idx("technical")] == 0);
  }

  TEST_CASE("stratified sample is seeded and per class") {
    std::vector<InferenceTrace> traces;
    for (int i = 0; i < 30; ++i)
      traces.push_back(trace("u" + std::to_string(i), Attribute::Gender, i % 3 ? "male" : "female", "male", 5));
    auto a = stratified_sample(traces, Attribute::Gender, 4, 42);
    auto b = stratified_sample(traces, Attribute::Gender, 4, 42);
    CHECK(a == b);
    CHECK(a.size() == 8);
    CHECK(std::set<std::string>(a.begin(), a.end()).size() == 8);
    bool differs = false;
    for (std::uint64_t seed = 1; seed < 10 && !differs; ++seed)
      differs = stratified_sample(traces, Attribute::Gender, 4, seed) != a;
    CHECK(differs);
    CHECK(stratified_sample(traces, Attribute::Gender, 100, 1).size() == 30);
  }
}
