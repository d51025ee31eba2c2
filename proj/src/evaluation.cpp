#include "leakscope/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "leakscope/canonical.hpp"
#include "leakscope/csv.hpp"
#include "leakscope/errors.hpp"
#include "leakscope/rng.hpp"

namespace leakscope {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace

ConfusionMatrix score_pairs(std::vector<std::string> classes,
                            std::span<const std::pair<std::string, std::optional<std::string>>> pairs) {
  if (pairs.empty()) throw EmptyInput("nothing to score");
  for (const auto& [truth, _] : pairs)
    if (std::find(classes.begin(), classes.end(), truth) == classes.end()) classes.push_back(truth);

  ConfusionMatrix m;
  m.classes = std::move(classes);
  const auto k = m.classes.size();
  m.counts.assign(k, std::vector<std::size_t>(k + 1, 0));
  m.other_detail.assign(k, {});
  auto index_of = [&](std::string_view label) {
    return static_cast<std::size_t>(std::find(m.classes.begin(), m.classes.end(), label) -
                                    m.classes.begin());
  };
  for (const auto& [truth, prediction] : pairs) {
    auto row = index_of(truth);
    auto col = prediction ? index_of(*prediction) : k;
    m.counts[row][col]++;
    if (col == k)
      m.other_detail[row]["other:" + (prediction ? *prediction : std::string("unparsed"))]++;
  }
  m.total = pairs.size();

  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = m.counts[c][c], row = 0, col = 0;
    for (std::size_t j = 0; j <= k; ++j) row += m.counts[c][j];
    for (std::size_t i = 0; i < k; ++i) col += m.counts[i][c];
    ClassMetrics cm;
    cm.label = m.classes[c];
    cm.support = row;
    cm.precision = ratio(tp, col);
    cm.recall = ratio(tp, row);
    cm.f1 = cm.precision + cm.recall == 0.0
                ? 0.0
                : 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
    m.weighted_f1 += static_cast<double>(row) / static_cast<double>(m.total) * cm.f1;
    m.metrics.push_back(std::move(cm));
  }
  return m;
}

std::vector<std::string> ConfusionMatrix::column_labels() const {
  auto cols = classes;
  cols.emplace_back(kOtherClass);
  return cols;
}

std::string ConfusionMatrix::to_csv() const {
  std::set<std::string> detail;
  for (const auto& row : other_detail)
    for (const auto& [label, _] : row) detail.insert(label);
  std::vector<std::string> header{"truth"};
  header.insert(header.end(), classes.begin(), classes.end());
  header.insert(header.end(), detail.begin(), detail.end());
  std::string out = csv_line(header);
  for (std::size_t r = 0; r < classes.size(); ++r) {
    std::vector<std::string> row{classes[r]};
    for (std::size_t c = 0; c < classes.size(); ++c) row.push_back(std::to_string(counts[r][c]));
    for (const auto& d : detail) {
      auto it = other_detail[r].find(d);
      row.push_back(std::to_string(it == other_detail[r].end() ? 0 : it->second));
    }
    out += csv_line(row);
  }
  return out;
}

std::string ConfusionMatrix::metrics_csv() const {
  std::string out = "label,precision,recall,f1,support\n";
  for (const auto& m : metrics)
    out += csv_line({m.label, format_number(m.precision), format_number(m.recall),
                     format_number(m.f1), std::to_string(m.support)});
  out += csv_line({"weighted", "", "", format_number(weighted_f1), std::to_string(total)});
  return out;
}

std::vector<std::string> scoring_classes(Attribute attribute, std::span<const InferenceTrace> traces) {
  std::vector<std::string> classes;
  if (is_open_label(attribute)) {
    std::set<std::string> truths;
    for (const auto& t : traces) truths.insert(canonical_country(t.truth));
    classes.assign(truths.begin(), truths.end());
  } else {
    for (auto label : allowed_labels(attribute)) classes.push_back(canonicalize(label));
  }
  return classes;
}

ConfusionMatrix score(std::span<const InferenceTrace> traces) {
  if (traces.empty()) throw EmptyInput("no traces to score");
  const auto attribute = traces.front().attribute;
  std::vector<std::pair<std::string, std::optional<std::string>>> pairs;
  for (const auto& t : traces) {
    if (t.attribute != attribute) throw Error("score: traces mix attributes");
    auto norm = [&](std::string_view s) {
      return attribute == Attribute::Country ? canonical_country(s) : canonicalize(s);
    };
    std::optional<std::string> prediction;
    if (t.outcome.final_label) prediction = norm(*t.outcome.final_label);
    pairs.emplace_back(norm(t.truth), std::move(prediction));
  }
  return score_pairs(scoring_classes(attribute, traces), pairs);
}

double majority_baseline(std::span<const std::size_t> supports) {
  if (supports.empty()) throw EmptyInput("no supports");
  std::vector<std::string> classes;
  for (std::size_t i = 0; i < supports.size(); ++i) classes.push_back("class" + std::to_string(i));
  auto majority = static_cast<std::size_t>(
      std::max_element(supports.begin(), supports.end()) - supports.begin());
  std::vector<std::pair<std::string, std::optional<std::string>>> pairs;
  for (std::size_t i = 0; i < supports.size(); ++i)
    for (std::size_t j = 0; j < supports[i]; ++j) pairs.emplace_back(classes[i], classes[majority]);
  return score_pairs(classes, pairs).weighted_f1;
}

std::map<std::string, ContextStats> context_stats(std::span<const InferenceTrace> traces,
                                                  ContextGroup group) {
  if (traces.empty()) throw EmptyInput("no traces for context statistics");
  std::map<std::string, std::vector<const InferenceTrace*>> groups;
  for (const auto& t : traces) {
    std::string key;
    switch (group) {
      case ContextGroup::Attribute: key = to_string(t.attribute); break;
      case ContextGroup::Kind: key = to_string(t.kind); break;
      case ContextGroup::Class:
        key = std::string(to_string(t.attribute)) + ":" + t.truth;
        break;
    }
    groups[key].push_back(&t);
  }
  std::map<std::string, ContextStats> out;
  for (const auto& [key, members] : groups) {
    ContextStats s;
    std::vector<double> all, matched;
    for (const auto* t : members) {
      ++s.count;
      if (t->outcome.context_needed) {
        double k = *t->outcome.context_needed;
        all.push_back(k);
        matched.push_back(k);
        s.histogram[*t->outcome.context_needed]++;
      } else {
        ++s.not_reached;
        all.push_back(100.0);
      }
    }
    s.mean = mean_of(all);
    s.median = median_of(all);
    if (!matched.empty()) {
      s.matched_mean = mean_of(matched);
      s.matched_median = median_of(matched);
    }
    out.emplace(key, std::move(s));
  }
  return out;
}

std::string context_stats_csv(const std::map<std::string, ContextStats>& stats) {
  std::string out = "group,count,not_reached,mean,median,matched_mean,matched_median\n";
  for (const auto& [key, s] : stats)
    out += csv_line({key, std::to_string(s.count), std::to_string(s.not_reached),
                     format_number(s.mean), format_number(s.median),
                     s.matched_mean ? format_number(*s.matched_mean) : "",
                     s.matched_median ? format_number(*s.matched_median) : ""});
  return out;
}

PlatformTable platform_table(const std::map<std::pair<Attribute, StreamKind>, double>& weighted_f1) {
  PlatformTable t;
  std::set<Attribute> rows;
  std::set<StreamKind> cols;
  for (const auto& [key, _] : weighted_f1) {
    rows.insert(key.first);
    cols.insert(key.second);
  }
  t.rows.assign(rows.begin(), rows.end());
  t.columns.assign(cols.begin(), cols.end());
  for (auto a : t.rows) {
    std::vector<std::optional<double>> row;
    double best = -1.0;
    for (auto k : t.columns) {
      auto it = weighted_f1.find({a, k});
      row.push_back(it == weighted_f1.end() ? std::nullopt : std::optional(it->second));
      if (row.back()) best = std::max(best, *row.back());
    }
    std::vector<bool> marks;
    for (const auto& cell : row) marks.push_back(cell && *cell == best);
    t.f1.push_back(std::move(row));
    t.best.push_back(std::move(marks));
  }
  return t;
}

std::string PlatformTable::to_csv() const {
  std::vector<std::string> header{"attribute"};
  for (auto k : columns) header.emplace_back(to_string(k));
  std::string out = csv_line(header);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<std::string> line{std::string(to_string(rows[r]))};
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (!f1[r][c]) {
        line.emplace_back();
        continue;
      }
      line.push_back(format_number(*f1[r][c]) + (best[r][c] ? "*" : ""));
    }
    out += csv_line(line);
  }
  return out;
}

std::vector<std::string> default_keywords() {
  return {"technical", "dominated", "male-dominated", "Western-style", "professional tone"};
}

KeywordCounts keyword_counts(std::span<const InferenceTrace> traces,
                             const std::vector<std::string>& keywords) {
  KeywordCounts out;
  out.keywords = keywords;
  std::vector<std::string> needles;
  for (const auto& k : keywords) needles.push_back(lower_ascii(k));
  for (const auto& t : traces) {
    auto text = lower_ascii(t.outcome.rationale_at_stopping);
    auto& attr = out.per_attribute[t.attribute];
    attr.resize(needles.size(), 0);
    auto& cell = out.per_cell[{t.attribute, t.truth,
                               t.outcome.final_label.value_or("unparsed")}];
    cell.resize(needles.size(), 0);
    for (std::size_t i = 0; i < needles.size(); ++i) {
      auto n = count_occurrences(text, needles[i]);
      attr[i] += n;
      cell[i] += n;
    }
  }
  return out;
}

std::string KeywordCounts::to_csv() const {
  std::vector<std::string> header{"attribute", "truth", "prediction"};
  header.insert(header.end(), keywords.begin(), keywords.end());
  std::string out = csv_line(header);
  for (const auto& [attr, counts] : per_attribute) {
    std::vector<std::string> row{std::string(to_string(attr)), "*", "*"};
    for (auto c : counts) row.push_back(std::to_string(c));
    out += csv_line(row);
  }
  for (const auto& [key, counts] : per_cell) {
    const auto& [attr, truth, prediction] = key;
    std::vector<std::string> row{std::string(to_string(attr)), truth, prediction};
    for (auto c : counts) row.push_back(std::to_string(c));
    out += csv_line(row);
  }
  return out;
}

std::vector<std::string> stratified_sample(std::span<const InferenceTrace> traces,
                                           Attribute attribute, std::size_t per_class,
                                           std::uint64_t seed) {
  if (per_class == 0) throw Error("stratified sample size must be at least 1");
  std::map<std::string, std::vector<std::string>> by_class;
  for (const auto& t : traces)
    if (t.attribute == attribute) by_class[t.truth].push_back(t.key());
  Rng engine(seed);
  std::vector<std::string> out;
  for (auto& [cls, keys] : by_class) {
    std::sort(keys.begin(), keys.end());
    auto take = std::min(per_class, keys.size());
    // Partial Fisher-Yates: the first `take` slots are the sample.
    for (std::size_t i = 0; i < take; ++i) {
      auto j = i + static_cast<std::size_t>(engine.below(keys.size() - i));
      std::swap(keys[i], keys[j]);
    }
    out.insert(out.end(), keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

}  // namespace leakscope
