#include "leakscope/svg.hpp"

#include <algorithm>
#include <cstdio>

namespace leakscope::svg {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string open_svg(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text_at(double x, double y, std::string_view s, std::string_view anchor = "start",
                    std::string_view extra = "") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + std::string(anchor) +
         "\"" + std::string(extra) + ">" + escape(s) + "</text>\n";
}

}  // namespace

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string heatmap(std::string_view title, std::span<const std::string> rows,
                    std::span<const std::string> cols,
                    const std::vector<std::vector<double>>& values) {
  const double cell = 48, left = 140, top = 110;
  const double w = left + cell * static_cast<double>(cols.size()) + 20;
  const double h = top + cell * static_cast<double>(rows.size()) + 20;
  double max = 0.0;
  for (const auto& r : values)
    for (double v : r) max = std::max(max, v);
  std::string out = open_svg(w, h);
  out += text_at(10, 20, title, "start", " font-size=\"14\"");
  for (std::size_t c = 0; c < cols.size(); ++c) {
    double x = left + cell * (static_cast<double>(c) + 0.5);
    out += text_at(x, top - 8, cols[c], "start",
                   " transform=\"rotate(-45 " + num(x) + " " + num(top - 8) + ")\"");
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double y = top + cell * static_cast<double>(r);
    out += text_at(left - 6, y + cell / 2 + 4, rows[r], "end");
    for (std::size_t c = 0; c < cols.size() && r < values.size() && c < values[r].size(); ++c) {
      double v = values[r][c];
      double t = max > 0 ? v / max : 0.0;
      int shade = static_cast<int>(255 - 200 * t);
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02xff", shade, shade);
      double x = left + cell * static_cast<double>(c);
      out += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cell) +
             "\" height=\"" + num(cell) + "\" fill=\"" + fill + "\" stroke=\"#999\"/>\n";
      char label[32];
      std::snprintf(label, sizeof label, "%g", v);
      out += text_at(x + cell / 2, y + cell / 2 + 4, label, "middle");
    }
  }
  return out + "</svg>\n";
}

std::string bar_chart(std::string_view title, std::span<const std::string> labels,
                      std::span<const double> values) {
  const double bar = 28, left = 50, top = 40, height = 200;
  const double w = left + bar * static_cast<double>(labels.size()) + 20;
  const double h = top + height + 60;
  double max = 0.0;
  for (double v : values) max = std::max(max, v);
  std::string out = open_svg(w, h);
  out += text_at(10, 20, title, "start", " font-size=\"14\"");
  out += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + height) + "\" x2=\"" + num(w - 10) +
         "\" y2=\"" + num(top + height) + "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < labels.size() && i < values.size(); ++i) {
    double bh = max > 0 ? values[i] / max * height : 0.0;
    double x = left + bar * static_cast<double>(i) + 3;
    out += "<rect x=\"" + num(x) + "\" y=\"" + num(top + height - bh) + "\" width=\"" +
           num(bar - 6) + "\" height=\"" + num(bh) + "\" fill=\"#4a78c2\"/>\n";
    char v[32];
    std::snprintf(v, sizeof v, "%g", values[i]);
    out += text_at(x + (bar - 6) / 2, top + height - bh - 3, v, "middle");
    out += text_at(x + (bar - 6) / 2, top + height + 14, labels[i], "middle");
  }
  return out + "</svg>\n";
}

std::string line_chart(std::string_view title, std::span<const double> xs,
                       std::span<const double> ys, std::optional<Line> fit) {
  const double left = 50, top = 40, width = 400, height = 240;
  std::string out = open_svg(left + width + 20, top + height + 40);
  out += text_at(10, 20, title, "start", " font-size=\"14\"");
  if (xs.empty() || xs.size() != ys.size()) return out + "</svg>\n";
  double xmin = *std::min_element(xs.begin(), xs.end());
  double xmax = *std::max_element(xs.begin(), xs.end());
  double ymax = std::max(1e-12, *std::max_element(ys.begin(), ys.end()));
  if (xmax == xmin) xmax = xmin + 1;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * width; };
  auto py = [&](double y) { return top + height - y / ymax * height; };
  out += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(width) +
         "\" height=\"" + num(height) + "\" fill=\"none\" stroke=\"#999\"/>\n";
  std::string points;
  for (std::size_t i = 0; i < xs.size(); ++i) points += num(px(xs[i])) + "," + num(py(ys[i])) + " ";
  out += "<polyline fill=\"none\" stroke=\"#4a78c2\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
  if (fit) {
    out += "<line x1=\"" + num(px(xmin)) + "\" y1=\"" + num(py(fit->intercept + fit->slope * xmin)) +
           "\" x2=\"" + num(px(xmax)) + "\" y2=\"" + num(py(fit->intercept + fit->slope * xmax)) +
           "\" stroke=\"#c24a4a\" stroke-dasharray=\"4 3\"/>\n";
  }
  char label[64];
  std::snprintf(label, sizeof label, "%g", ymax);
  out += text_at(left - 4, top + 4, label, "end");
  out += text_at(left - 4, top + height, "0", "end");
  std::snprintf(label, sizeof label, "%g", xmin);
  out += text_at(left, top + height + 16, label, "middle");
  std::snprintf(label, sizeof label, "%g", xmax);
  out += text_at(left + width, top + height + 16, label, "middle");
  return out + "</svg>\n";
}

}  // namespace leakscope::svg
