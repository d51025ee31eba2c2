#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace leakscope::svg {

// Static, dependency-free SVG renderings for reports.

std::string heatmap(std::string_view title, std::span<const std::string> row_labels,
                    std::span<const std::string> column_labels,
                    const std::vector<std::vector<double>>& values);

std::string bar_chart(std::string_view title, std::span<const std::string> labels,
                      std::span<const double> values);

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

std::string line_chart(std::string_view title, std::span<const double> xs,
                       std::span<const double> ys, std::optional<Line> fit = std::nullopt);

std::string escape(std::string_view text);

}  // namespace leakscope::svg
