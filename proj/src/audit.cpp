#include "leakscope/audit.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "leakscope/csv.hpp"
#include "leakscope/errors.hpp"
#include "leakscope/taxonomy.hpp"

namespace leakscope {

std::optional<double> discovery_point(std::span<const std::size_t> flagged_indices,
                                      std::size_t total_messages) {
  if (total_messages == 0) throw EmptyStream("discovery point of an empty stream");
  if (flagged_indices.empty()) return std::nullopt;
  auto first = *std::min_element(flagged_indices.begin(), flagged_indices.end());
  if (first >= total_messages)
    throw Error("flag index " + std::to_string(first) + " outside stream of " +
                std::to_string(total_messages));
  return 100.0 * static_cast<double>(first) / static_cast<double>(total_messages);
}

DiscoverySummary discovery_summary(std::span<const std::optional<double>> points,
                                   double bin_width) {
  if (!(bin_width > 0.0)) throw Error("histogram bin width must be positive");
  DiscoverySummary s;
  s.bin_width = bin_width;
  std::vector<double> values;
  for (const auto& p : points) {
    if (p) values.push_back(*p);
    else ++s.absent;
  }
  if (values.empty()) throw NoData("no present discovery points");
  std::sort(values.begin(), values.end());
  s.count = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  auto n = values.size();
  s.median = n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
  auto bins = static_cast<std::size_t>(std::ceil(100.0 / bin_width));
  s.histogram.assign(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>(std::floor(v / bin_width));
    s.histogram[std::min(b, bins - 1)]++;
  }
  return s;
}

CategoryTable category_distribution(std::span<const LabeledDisclosure> labels, GroupKey key) {
  if (labels.empty()) throw NoData("no category labels");
  CategoryTable t;
  for (auto name : category_names()) t.categories.emplace_back(name);
  if (key == GroupKey::All) {
    t.groups = {"all"};
  } else {
    std::set<std::string> countries;
    for (const auto& l : labels) countries.insert(l.country);
    t.groups.assign(countries.begin(), countries.end());
  }
  t.count.assign(t.categories.size(), std::vector<std::size_t>(t.groups.size(), 0));
  std::vector<std::size_t> totals(t.groups.size(), 0);
  for (const auto& l : labels) {
    auto row = std::find(t.categories.begin(), t.categories.end(), l.category);
    if (row == t.categories.end()) throw Error("unknown category '" + l.category + "'");
    std::size_t col = 0;
    if (key == GroupKey::Country)
      col = static_cast<std::size_t>(
          std::lower_bound(t.groups.begin(), t.groups.end(), l.country) - t.groups.begin());
    t.count[static_cast<std::size_t>(row - t.categories.begin())][col]++;
    totals[col]++;
  }
  t.percent.assign(t.categories.size(), std::vector<double>(t.groups.size(), 0.0));
  for (std::size_t r = 0; r < t.categories.size(); ++r)
    for (std::size_t c = 0; c < t.groups.size(); ++c)
      t.percent[r][c] = 100.0 * static_cast<double>(t.count[r][c]) / static_cast<double>(totals[c]);
  return t;
}

std::string CategoryTable::to_csv() const {
  std::vector<std::string> header{"category"};
  header.insert(header.end(), groups.begin(), groups.end());
  std::string out = csv_line(header);
  for (std::size_t r = 0; r < categories.size(); ++r) {
    std::vector<std::string> row{categories[r]};
    for (double p : percent[r]) row.push_back(format_number(p));
    out += csv_line(row);
  }
  return out;
}

LeakCurve leak_curve(std::span<const UserFlags> users, double step) {
  if (users.empty()) throw NoData("leak curve needs at least one user");
  if (!(step > 0.0) || step > 1.0) throw Error("leak curve step must be in (0, 1]");
  // The grid is i/S for i = 0..S; evaluating ceil(i*N/S) in integers keeps
  // the step function exact.
  const auto S = static_cast<std::size_t>(std::llround(1.0 / step));
  std::vector<std::int64_t> total(S + 1, 0);
  for (const auto& u : users) {
    if (u.length == 0) throw EmptyStream("leak curve over an empty stream");
    std::vector<std::size_t> sorted = u.flagged_indices;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i <= S; ++i) {
      std::size_t cutoff = (i * u.length + S - 1) / S;
      total[i] += std::lower_bound(sorted.begin(), sorted.end(), cutoff) - sorted.begin();
    }
  }

  LeakCurve curve;
  const double U = static_cast<double>(users.size());
  for (std::size_t i = 0; i <= S; ++i) {
    curve.grid.push_back(static_cast<double>(i) / static_cast<double>(S));
    curve.mean_count.push_back(static_cast<double>(total[i]) / U);
  }

  // Fit on (i, total[i]) with exact integer moments, then rescale.
  using i128 = __int128;
  const i128 n = static_cast<i128>(S + 1);
  i128 sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i <= S; ++i) {
    i128 x = static_cast<i128>(i), y = total[i];
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const i128 cxx = n * sxx - sx * sx;
  const i128 cyy = n * syy - sy * sy;
  const i128 cxy = n * sxy - sx * sy;
  const double slope_index = static_cast<double>(cxy) / static_cast<double>(cxx);
  curve.slope = slope_index * static_cast<double>(S) / U;
  curve.intercept = (static_cast<double>(sy) - slope_index * static_cast<double>(sx)) /
                    static_cast<double>(n) / U;
  if (cyy == 0) {
    curve.r_squared = 1.0;
  } else {
    const i128 num = cxy * cxy;
    const i128 den = cxx * cyy;
    curve.r_squared = num == den ? 1.0
                                 : static_cast<double>(static_cast<long double>(num) /
                                                       static_cast<long double>(den));
  }
  return curve;
}

std::string LeakCurve::to_csv() const {
  std::string out = "fraction,mean_count\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    out += csv_line({format_number(grid[i]), format_number(mean_count[i])});
  return out;
}

}  // namespace leakscope
