#include "leakscope/cohort.hpp"

#include <algorithm>
#include <cmath>

#include "leakscope/csv.hpp"
#include "leakscope/errors.hpp"

namespace leakscope {

CohortRule CohortRule::percentile(double p, bool require_all_safe) {
  return {Mode::Percentile, p, require_all_safe};
}

CohortRule CohortRule::absolute(std::size_t n, bool require_all_safe) {
  return {Mode::Absolute, static_cast<double>(n), require_all_safe};
}

void CohortRule::validate() const {
  if (mode == Mode::Percentile && !(value > 0.0 && value < 100.0))
    throw ConfigError("cohort.percentile: must be in (0, 100)");
  if (mode == Mode::Absolute && (value < 0.0 || value != std::floor(value)))
    throw ConfigError("cohort.absolute: must be a non-negative integer");
}

std::size_t nearest_rank(std::vector<std::size_t> values, double p) {
  if (values.empty()) throw NoData("percentile of an empty set");
  std::sort(values.begin(), values.end());
  // The small tolerance keeps p*n/100 that is integral in exact arithmetic
  // from rounding up a rank.
  double exact = p / 100.0 * static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

CohortResult build_cohort(std::span<const UserRecord> users,
                          const std::map<std::string, std::vector<llm::Verdict>>& verdicts,
                          const CohortRule& rule) {
  rule.validate();
  CohortResult result;
  std::vector<std::size_t> lengths;
  for (const auto& u : users) {
    const auto* chat = u.stream(StreamKind::ChatAssistant);
    lengths.push_back(chat ? chat->size() : 0);
  }
  if (rule.mode == CohortRule::Mode::Absolute)
    result.threshold = static_cast<std::size_t>(rule.value);
  else if (!lengths.empty())
    result.threshold = nearest_rank(lengths, rule.value);

  for (std::size_t i = 0; i < users.size(); ++i) {
    const auto& u = users[i];
    auto it = verdicts.find(u.user_id);
    if (it == verdicts.end() || it->second.size() != lengths[i])
      throw MissingVerdicts("incomplete verdicts for user " + u.user_id);
    CohortEntry e{u.user_id, lengths[i], true, {}};
    if (lengths[i] <= result.threshold) e.reasons.emplace_back(kReasonLengthFloor);
    if (rule.require_all_safe) {
      const auto& v = it->second;
      if (std::find(v.begin(), v.end(), llm::Verdict::Unsafe) != v.end())
        e.reasons.emplace_back(kReasonUnsafe);
      if (std::find(v.begin(), v.end(), llm::Verdict::Unresolved) != v.end())
        e.reasons.emplace_back(kReasonUnresolved);
    }
    e.included = e.reasons.empty();
    result.entries.push_back(std::move(e));
  }
  return result;
}

std::vector<std::string> CohortResult::included_ids() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (e.included) out.push_back(e.user_id);
  return out;
}

std::vector<std::string> CohortResult::excluded_ids() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (!e.included) out.push_back(e.user_id);
  return out;
}

std::string CohortResult::to_csv() const {
  std::string out = "user_id,included,reason,chat_length\n";
  for (const auto& e : entries) {
    std::string reasons;
    for (const auto& r : e.reasons) reasons += (reasons.empty() ? "" : ";") + r;
    out += csv_line({e.user_id, e.included ? "true" : "false", reasons,
                     std::to_string(e.chat_length)});
  }
  return out;
}

CohortResult parse_cohort_csv(std::string_view csv) {
  CohortResult result;
  bool header = true;
  while (!csv.empty()) {
    auto nl = csv.find('\n');
    auto line = csv.substr(0, nl);
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto cells = split_csv_line(line);
    if (cells.size() != 4) throw SchemaError("cohort manifest: expected 4 columns");
    CohortEntry e;
    e.user_id = cells[0];
    e.included = cells[1] == "true";
    std::string_view reasons = cells[2];
    while (!reasons.empty()) {
      auto semi = reasons.find(';');
      e.reasons.emplace_back(reasons.substr(0, semi));
      reasons = semi == std::string_view::npos ? std::string_view{} : reasons.substr(semi + 1);
    }
    e.chat_length = std::stoul(cells[3]);
    result.entries.push_back(std::move(e));
  }
  return result;
}

}  // namespace leakscope
