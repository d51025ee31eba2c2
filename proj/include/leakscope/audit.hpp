#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace leakscope {

// Percentage of the history read before the first flagged message:
// 100 * first / total with a 0-based index. nullopt when nothing is flagged.
// Throws EmptyStream when total is 0.
std::optional<double> discovery_point(std::span<const std::size_t> flagged_indices,
                                      std::size_t total_messages);

struct DiscoverySummary {
  std::size_t count = 0;   // present points
  std::size_t absent = 0;  // users with no flag
  double mean = 0.0;
  double median = 0.0;
  double bin_width = 5.0;
  std::vector<std::size_t> histogram;  // bin b covers [b*w, (b+1)*w)
};

// Absent points are skipped. Throws NoData when no point is present.
DiscoverySummary discovery_summary(std::span<const std::optional<double>> points,
                                   double bin_width = 5.0);

struct LabeledDisclosure {
  std::string category;  // one of category_names()
  std::string country;   // group key for per-country tables
};

enum class GroupKey { All, Country };

struct CategoryTable {
  std::vector<std::string> groups;      // column headers
  std::vector<std::string> categories;  // row headers, table order
  // percent[row][col] and count[row][col]
  std::vector<std::vector<double>> percent;
  std::vector<std::vector<std::size_t>> count;

  std::string to_csv() const;
};

// Share of each category among a group's labelled messages. Groups with no
// labels do not appear. Throws NoData for empty input.
CategoryTable category_distribution(std::span<const LabeledDisclosure> labels, GroupKey key);

struct UserFlags {
  std::vector<std::size_t> flagged_indices;
  std::size_t length = 0;
};

struct LeakCurve {
  std::vector<double> grid;        // fractions 0..1
  std::vector<double> mean_count;  // mean cumulative flagged count
  double slope = 0.0;              // per unit fraction
  double intercept = 0.0;
  double r_squared = 0.0;

  std::string to_csv() const;
};

// At fraction f a user's cumulative count is the number of flags with
// index < ceil(f * length). Curves are averaged over users and fitted by
// least squares. Throws NoData for no users, EmptyStream for a zero length.
LeakCurve leak_curve(std::span<const UserFlags> users, double step = 0.01);

}  // namespace leakscope
