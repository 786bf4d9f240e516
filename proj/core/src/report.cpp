#include "sonarcursor/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "sonarcursor/errors.hpp"

namespace sonar {

std::string fmt_num(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(const std::string& data) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

std::string meta_comment(const ReportMeta& meta) {
  std::string out;
  out += "# schema_version=" + std::to_string(meta.schema_version) + "\n";
  out += "# seed=" + std::to_string(meta.seed) + "\n";
  out += "# config_hash=" + meta.config_hash + "\n";
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw ConfigError("short write: " + path);
}

namespace {

constexpr const char* kPalette[] = {"#4477aa", "#ee6677", "#228833",
                                    "#ccbb44", "#66ccee", "#aa3377"};
constexpr int kPaletteSize = 6;
constexpr double kW = 760.0, kH = 420.0;
constexpr double kL = 70.0, kR = 24.0, kT = 48.0, kB = 64.0;

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0, hi = 1.0;
  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi - lo < 1e-12) {
      lo -= 1.0;
      hi += 1.0;
    } else {
      const double m = 0.06 * (hi - lo);
      lo -= m;
      hi += m;
    }
  }
  double frac(double v) const { return (v - lo) / (hi - lo); }
};

std::string svg_open(const std::string& title, const std::string& data_csv) {
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_num(kW) + "\" height=\"" +
       fmt_num(kH) + "\" viewBox=\"0 0 " + fmt_num(kW) + " " + fmt_num(kH) + "\">\n";
  s += "<desc>" + esc(data_csv) + "</desc>\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  s += "<text x=\"" + fmt_num(kW / 2) + "\" y=\"26\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\" fill=\"#222\">" +
       esc(title) + "</text>\n";
  return s;
}

std::string axis_labels(const std::string& x_label, const std::string& y_label) {
  std::string s;
  s += "<text x=\"" + fmt_num((kL + kW - kR) / 2) + "\" y=\"" + fmt_num(kH - 16) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#222\">" +
       esc(x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + fmt_num((kT + kH - kB) / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#222\" transform=\"rotate(-90 18 " +
       fmt_num((kT + kH - kB) / 2) + ")\">" + esc(y_label) + "</text>\n";
  return s;
}

std::string frame_and_yticks(const Range& yr) {
  std::string s;
  s += "<rect x=\"" + fmt_num(kL) + "\" y=\"" + fmt_num(kT) + "\" width=\"" +
       fmt_num(kW - kL - kR) + "\" height=\"" + fmt_num(kH - kT - kB) +
       "\" fill=\"none\" stroke=\"#999\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = yr.lo + (yr.hi - yr.lo) * i / 5.0;
    const double y = kH - kB - (kH - kT - kB) * i / 5.0;
    s += "<line x1=\"" + fmt_num(kL - 4) + "\" y1=\"" + fmt_num(y) + "\" x2=\"" + fmt_num(kL) +
         "\" y2=\"" + fmt_num(y) + "\" stroke=\"#999\"/>\n";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    s += "<text x=\"" + fmt_num(kL - 8) + "\" y=\"" + fmt_num(y + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\">" + buf +
         "</text>\n";
  }
  return s;
}

std::string legend(const std::vector<std::string>& labels) {
  std::string s;
  double x = kL + 8;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const char* color = kPalette[i % kPaletteSize];
    s += "<rect x=\"" + fmt_num(x) + "\" y=\"" + fmt_num(kT + 6) +
         "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
    s += "<text x=\"" + fmt_num(x + 16) + "\" y=\"" + fmt_num(kT + 16) +
         "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">" + esc(labels[i]) +
         "</text>\n";
    x += 24 + 7.5 * labels[i].size();
  }
  return s;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<SvgSeries>& series) {
  Range xr{1e300, -1e300}, yr{1e300, -1e300};
  std::string csv = "series,x,y\n";
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xr.include(x);
      yr.include(y);
      csv += s.label + "," + fmt_num(x) + "," + fmt_num(y) + "\n";
    }
  xr.pad();
  yr.pad();
  std::string out = svg_open(title, csv);
  out += frame_and_yticks(yr);
  out += axis_labels(x_label, y_label);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % kPaletteSize];
    labels.push_back(series[i].label);
    std::string pts;
    for (const auto& [x, y] : series[i].points) {
      const double px = kL + (kW - kL - kR) * xr.frac(x);
      const double py = kH - kB - (kH - kT - kB) * yr.frac(y);
      pts += fmt_num(px) + "," + fmt_num(py) + " ";
      out += "<circle cx=\"" + fmt_num(px) + "\" cy=\"" + fmt_num(py) + "\" r=\"3.5\" fill=\"" +
             color + "\"/>\n";
    }
    out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
  }
  // x ticks from the union of x values of the first series
  if (!series.empty()) {
    for (const auto& [x, y] : series.front().points) {
      (void)y;
      const double px = kL + (kW - kL - kR) * xr.frac(x);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3g", x);
      out += "<text x=\"" + fmt_num(px) + "\" y=\"" + fmt_num(kH - kB + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\">" +
             buf + "</text>\n";
    }
  }
  out += legend(labels);
  out += "</svg>\n";
  return out;
}

std::string svg_grouped_bars(const std::string& title, const std::string& y_label,
                             const std::vector<std::string>& group_labels,
                             const std::vector<SvgBarSeries>& series) {
  Range yr{0.0, -1e300};
  std::string csv = "series,group,value\n";
  for (const auto& s : series)
    for (std::size_t g = 0; g < s.values.size(); ++g) {
      yr.include(s.values[g]);
      csv += s.label + "," + (g < group_labels.size() ? group_labels[g] : fmt_num(g)) + "," +
             fmt_num(s.values[g]) + "\n";
    }
  yr.pad();
  yr.lo = std::min(yr.lo, 0.0);
  std::string out = svg_open(title, csv);
  out += frame_and_yticks(yr);
  out += axis_labels("", y_label);
  const std::size_t ngroups = group_labels.size();
  const double gw = (kW - kL - kR) / std::max<std::size_t>(ngroups, 1);
  const double bw = gw * 0.8 / std::max<std::size_t>(series.size(), 1);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < series.size(); ++i) {
    labels.push_back(series[i].label);
    const char* color = kPalette[i % kPaletteSize];
    for (std::size_t g = 0; g < series[i].values.size() && g < ngroups; ++g) {
      const double v = series[i].values[g];
      const double x = kL + gw * g + gw * 0.1 + bw * i;
      const double y0 = kH - kB - (kH - kT - kB) * yr.frac(0.0);
      const double y1 = kH - kB - (kH - kT - kB) * yr.frac(v);
      out += "<rect x=\"" + fmt_num(x) + "\" y=\"" + fmt_num(std::min(y0, y1)) + "\" width=\"" +
             fmt_num(bw) + "\" height=\"" + fmt_num(std::abs(y0 - y1)) + "\" fill=\"" + color +
             "\"/>\n";
    }
  }
  for (std::size_t g = 0; g < ngroups; ++g) {
    out += "<text x=\"" + fmt_num(kL + gw * g + gw / 2) + "\" y=\"" + fmt_num(kH - kB + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\">" +
           esc(group_labels[g]) + "</text>\n";
  }
  out += legend(labels);
  out += "</svg>\n";
  return out;
}

std::string svg_scatter_fit(const std::string& title, const std::string& x_label,
                            const std::string& y_label,
                            const std::vector<std::pair<double, double>>& points, double a,
                            double b) {
  Range xr{1e300, -1e300}, yr{1e300, -1e300};
  std::string csv = "x,y\n";
  for (const auto& [x, y] : points) {
    xr.include(x);
    yr.include(y);
    csv += fmt_num(x) + "," + fmt_num(y) + "\n";
  }
  csv += "fit_a," + fmt_num(a) + "\nfit_b," + fmt_num(b) + "\n";
  xr.pad();
  yr.include(a + b * xr.lo);
  yr.include(a + b * xr.hi);
  yr.pad();
  std::string out = svg_open(title, csv);
  out += frame_and_yticks(yr);
  out += axis_labels(x_label, y_label);
  const double x1 = kL, x2 = kW - kR;
  const double fy1 = kH - kB - (kH - kT - kB) * yr.frac(a + b * xr.lo);
  const double fy2 = kH - kB - (kH - kT - kB) * yr.frac(a + b * xr.hi);
  out += "<line x1=\"" + fmt_num(x1) + "\" y1=\"" + fmt_num(fy1) + "\" x2=\"" + fmt_num(x2) +
         "\" y2=\"" + fmt_num(fy2) + "\" stroke=\"" + kPalette[1] + "\" stroke-width=\"2\"/>\n";
  for (const auto& [x, y] : points) {
    const double px = kL + (kW - kL - kR) * xr.frac(x);
    const double py = kH - kB - (kH - kT - kB) * yr.frac(y);
    out += "<circle cx=\"" + fmt_num(px) + "\" cy=\"" + fmt_num(py) + "\" r=\"4\" fill=\"" +
           kPalette[0] + "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace sonar
