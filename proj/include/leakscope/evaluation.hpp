#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "leakscope/corpus.hpp"
#include "leakscope/inference.hpp"

namespace leakscope {

inline constexpr std::string_view kOtherClass = "other";

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

// Rows are truth classes, columns the same classes followed by "other",
// which collects every prediction outside the class list (Unparsed included).
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> counts;  // classes x (classes + 1)
  // Out-of-set predictions per truth row, keyed "other:<label>".
  std::vector<std::map<std::string, std::size_t>> other_detail;
  std::vector<ClassMetrics> metrics;
  std::size_t total = 0;
  double weighted_f1 = 0.0;

  std::vector<std::string> column_labels() const;
  std::string to_csv() const;          // counts, with other:<label> columns expanded
  std::string metrics_csv() const;     // label,precision,recall,f1,support
};

// Scores (truth, prediction) pairs over `classes`. Truth values outside the
// list are appended as classes. 0/0 precision or recall is 0. Labels are
// compared verbatim; callers canonicalize. Throws EmptyInput.
ConfusionMatrix score_pairs(std::vector<std::string> classes,
                            std::span<const std::pair<std::string, std::optional<std::string>>> pairs);

// Class list used when scoring an attribute: the closed set in canonical
// form, or for Country the sorted distinct canonical truths.
std::vector<std::string> scoring_classes(Attribute attribute, std::span<const InferenceTrace> traces);

// Scores final labels against truths. All traces must share one attribute.
// Throws EmptyInput.
ConfusionMatrix score(std::span<const InferenceTrace> traces);

// Weighted F1 of always predicting the largest class (first on ties).
// Throws EmptyInput.
double majority_baseline(std::span<const std::size_t> supports);

enum class ContextGroup { Attribute, Class, Kind };

struct ContextStats {
  std::size_t count = 0;
  std::size_t not_reached = 0;
  // NotReached counted as 100.
  double mean = 0.0;
  double median = 0.0;
  // Matched traces only; absent when none matched.
  std::optional<double> matched_mean;
  std::optional<double> matched_median;
  std::map<int, std::size_t> histogram;  // context_needed -> traces; NotReached excluded
};

// Groups absent from the input do not appear. Throws EmptyInput.
std::map<std::string, ContextStats> context_stats(std::span<const InferenceTrace> traces,
                                                  ContextGroup group);
std::string context_stats_csv(const std::map<std::string, ContextStats>& stats);

struct PlatformTable {
  std::vector<Attribute> rows;
  std::vector<StreamKind> columns;
  std::vector<std::vector<std::optional<double>>> f1;
  std::vector<std::vector<bool>> best;  // every cell equal to the row maximum

  std::string to_csv() const;  // best cells suffixed with '*'
};

PlatformTable platform_table(const std::map<std::pair<Attribute, StreamKind>, double>& weighted_f1);

std::vector<std::string> default_keywords();

struct KeywordCounts {
  std::vector<std::string> keywords;
  std::map<Attribute, std::vector<std::size_t>> per_attribute;
  // (attribute, truth, prediction) -> counts; prediction "unparsed" for none
  std::map<std::tuple<Attribute, std::string, std::string>, std::vector<std::size_t>> per_cell;

  std::string to_csv() const;
};

// Case-insensitive occurrence counts over rationale_at_stopping texts.
KeywordCounts keyword_counts(std::span<const InferenceTrace> traces,
                             const std::vector<std::string>& keywords = default_keywords());

// Up to `per_class` trace keys per ground-truth class of `attribute`, drawn
// uniformly without replacement. Deterministic for a fixed seed on every
// platform. Classes in sorted order.
std::vector<std::string> stratified_sample(std::span<const InferenceTrace> traces,
                                           Attribute attribute, std::size_t per_class,
                                           std::uint64_t seed);

}  // namespace leakscope
