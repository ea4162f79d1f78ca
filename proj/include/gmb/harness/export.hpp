#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gmb/core/error.hpp"
#include "gmb/harness/runner.hpp"

namespace gmb::harness {

/// Decimal with 17 significant digits, enough to round-trip a double.
inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// CSV with header step,mean,lo,hi,label; steps count from 1.
inline std::string to_csv(const std::vector<AggregateSeries>& series) {
  std::ostringstream os;
  os << "step,mean,lo,hi,label\n";
  for (const AggregateSeries& s : series) {
    for (std::size_t t = 0; t < s.steps(); ++t) {
      os << (t + 1) << ',' << format_double(s.mean[t]) << ',' << format_double(s.lo[t]) << ','
         << format_double(s.hi[t]) << ',' << s.label << '\n';
    }
  }
  return os.str();
}

/// Inverse of to_csv.
inline std::vector<AggregateSeries> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("step,mean,lo,hi", 0) != 0) throw InvalidInput("missing CSV header");
  std::vector<AggregateSeries> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields = split(line, ',');
    if (fields.size() < 4) throw InvalidInput("short CSV row: " + line);
    const std::string label = fields.size() > 4 ? fields[4] : std::string();
    if (out.empty() || out.back().label != label) {
      out.push_back({});
      out.back().label = label;
    }
    AggregateSeries& s = out.back();
    s.mean.push_back(std::stod(fields[1]));
    s.lo.push_back(std::stod(fields[2]));
    s.hi.push_back(std::stod(fields[3]));
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

/// Self-contained SVG line chart: one mean line and envelope ribbon per series.
inline std::string to_svg(const std::vector<AggregateSeries>& series, const std::string& title,
                          const std::string& y_label) {
  if (series.empty() || series.front().steps() == 0) throw InvalidInput("nothing to plot");
  constexpr double kWidth = 720;
  constexpr double kHeight = 440;
  constexpr double kLeft = 70;
  constexpr double kRight = 170;
  constexpr double kTop = 40;
  constexpr double kBottom = 50;
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::size_t steps = 0;
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();
  for (const AggregateSeries& s : series) {
    steps = std::max(steps, s.steps());
    for (std::size_t t = 0; t < s.steps(); ++t) {
      y_min = std::min(y_min, s.lo[t]);
      y_max = std::max(y_max, s.hi[t]);
    }
  }
  y_min = std::min(y_min, 0.0);
  if (!(y_max > y_min)) y_max = y_min + 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto x_of = [&](std::size_t t) { return kLeft + plot_w * static_cast<double>(t) / static_cast<double>(std::max<std::size_t>(steps - 1, 1)); };
  auto y_of = [&](double v) { return kTop + plot_h * (1.0 - (v - y_min) / (y_max - y_min)); };
  // Plotting every step of long runs only bloats the file.
  const std::size_t stride = std::max<std::size_t>(1, steps / 500);

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << xml_escape(title) << "</text>\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
     << kTop + plot_h << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = y_min + (y_max - y_min) * i / 4.0;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << y_of(v) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << std::setprecision(1) << v
       << std::setprecision(2) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">step (1.." << steps << ")</text>\n"
     << "<text x=\"16\" y=\"" << kTop + plot_h / 2 << "\" transform=\"rotate(-90 16 " << kTop + plot_h / 2
     << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const AggregateSeries& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    for (std::size_t t = 0; t < s.steps(); t += stride) os << x_of(t) << ',' << y_of(s.hi[t]) << ' ';
    for (std::size_t t = s.steps(); t-- > 0;) {
      if (t % stride == 0) os << x_of(t) << ',' << y_of(s.lo[t]) << ' ';
    }
    os << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t t = 0; t < s.steps(); t += stride) os << x_of(t) << ',' << y_of(s.mean[t]) << ' ';
    os << "\"/>\n";
    const double ly = kTop + 16.0 * static_cast<double>(k);
    os << "<line x1=\"" << kLeft + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + plot_w + 32 << "\" y2=\""
       << ly << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n"
       << "<text x=\"" << kLeft + plot_w + 36 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Writes <dir>/<name>.csv and <dir>/<name>.svg for one experiment.
inline void export_result(const ExperimentResult& result, const std::filesystem::path& dir, bool svg = true) {
  if (result.series.empty()) throw InvalidInput("empty result");
  write_file(dir / (result.config.name + ".csv"), to_csv(result.series));
  if (svg) {
    write_file(dir / (result.config.name + ".svg"),
               to_svg(result.series, result.config.name, result.regret ? "accumulated regret" : "accumulated reward"));
  }
}

}  // namespace gmb::harness
