#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "leakscope/corpus.hpp"
#include "leakscope/llm/parse.hpp"

namespace leakscope {

struct CohortRule {
  enum class Mode { Percentile, Absolute };
  Mode mode = Mode::Percentile;
  double value = 10.0;  // p in (0, 100) or a message count n >= 0
  bool require_all_safe = true;

  static CohortRule percentile(double p, bool require_all_safe = true);
  static CohortRule absolute(std::size_t n, bool require_all_safe = true);
  void validate() const;  // throws ConfigError
};

inline constexpr std::string_view kReasonLengthFloor = "length_floor";
inline constexpr std::string_view kReasonUnsafe = "unsafe_message";
inline constexpr std::string_view kReasonUnresolved = "unresolved_verdict";

struct CohortEntry {
  std::string user_id;
  std::size_t chat_length = 0;
  bool included = false;
  std::vector<std::string> reasons;  // empty iff included
};

struct CohortResult {
  std::size_t threshold = 0;  // users at or below it are excluded
  std::vector<CohortEntry> entries;  // input order

  std::vector<std::string> included_ids() const;
  std::vector<std::string> excluded_ids() const;
  // user_id,included,reason,chat_length
  std::string to_csv() const;
};

// Verdicts are keyed by user id and must hold one verdict per chat message.
// Throws MissingVerdicts naming the first user without a complete list.
CohortResult build_cohort(std::span<const UserRecord> users,
                          const std::map<std::string, std::vector<llm::Verdict>>& verdicts,
                          const CohortRule& rule);

// Nearest-rank percentile: the value at rank ceil(p/100 * n) of the sorted
// multiset. Throws NoData for an empty multiset.
std::size_t nearest_rank(std::vector<std::size_t> values, double p);

// Parses a manifest written by CohortResult::to_csv.
CohortResult parse_cohort_csv(std::string_view csv);

}  // namespace leakscope
