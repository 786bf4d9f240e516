#pragma once

// report - deterministic text/CSV/SVG emission. No timestamps, no locale
// dependence: identical inputs produce byte-identical files. SVG charts are
// standalone and carry their numbers in an embedded CSV <desc> block.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sonar {

std::string fmt_num(double v);  // shortest stable decimal form ("%.10g")

std::uint64_t fnv1a64(const std::string& data);
std::string hash_hex(const std::string& data);  // 16 hex chars of fnv1a64

struct ReportMeta {
  int schema_version = 1;
  std::uint64_t seed = 0;
  std::string config_hash;
};

// "# schema_version=..." comment lines prepended to CSV outputs.
std::string meta_comment(const ReportMeta& meta);

void write_text_file(const std::string& path, const std::string& content);

// --- SVG charts -------------------------------------------------------------

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<SvgSeries>& series);

struct SvgBarSeries {
  std::string label;
  std::vector<double> values;  // one per group
};

std::string svg_grouped_bars(const std::string& title, const std::string& y_label,
                             const std::vector<std::string>& group_labels,
                             const std::vector<SvgBarSeries>& series);

// Scatter plus a regression line y = a + b*x drawn across the x range.
std::string svg_scatter_fit(const std::string& title, const std::string& x_label,
                            const std::string& y_label,
                            const std::vector<std::pair<double, double>>& points, double a,
                            double b);

}  // namespace sonar
