#ifndef SMOOTHLAB_REPORT_HPP
#define SMOOTHLAB_REPORT_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smoothlab/errors.hpp"

namespace smoothlab {

// Locale-independent scientific formatting (std::to_chars), so identical runs
// produce byte-identical text artifacts regardless of environment locale.
inline std::string format_sci(double v, int precision = 12) {
  char buf[48];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, precision);
  if (res.ec != std::errc{}) throw RunError("number formatting failed");
  return std::string(buf, res.ptr);
}

inline std::string format_short(double v) {
  char buf[48];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
  if (res.ec != std::errc{}) throw RunError("number formatting failed");
  return std::string(buf, res.ptr);
}

// RFC-4180: CRLF line endings; fields here are numeric/boolean so no quoting
// is ever required.
inline void write_csv(const std::string& path, const std::string& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunError("cannot open for writing: " + path);
  out << header << "\r\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << "\r\n";
  }
  if (!out) throw RunError("write failed: " + path);
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw RunError("write failed: " + path);
}

// --- Minimal static SVG plots ----------------------------------------------------
//
// Log-log scatter+line plot, self-contained, no external assets.  Styling is
// intentionally spare; these are run artifacts, not publication figures.

inline void write_loglog_svg(const std::string& path, const std::string& title,
                             const std::string& xlabel, const std::string& ylabel,
                             const std::vector<std::pair<double, double>>& pts) {
  const int W = 640, H = 480, ml = 80, mr = 30, mt = 50, mb = 60;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunError("cannot open for writing: " + path);

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& [x, y] : pts) {
    if (x <= 0.0 || y <= 0.0) continue;  // log axes: positive data only
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  const bool have = xmin <= xmax && ymin <= ymax;
  if (have) {
    if (xmin == xmax) {
      xmin *= 0.5;
      xmax *= 2.0;
    }
    if (ymin == ymax) {
      ymin *= 0.5;
      ymax *= 2.0;
    }
  }
  auto px = [&](double x) {
    return ml + (std::log(x) - std::log(xmin)) / (std::log(xmax) - std::log(xmin)) *
                    (W - ml - mr);
  };
  auto py = [&](double y) {
    return H - mb - (std::log(y) - std::log(ymin)) / (std::log(ymax) - std::log(ymin)) *
                        (H - mt - mb);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"16\">" << title << "</text>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
      << H - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 15
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xlabel
      << " (log)</text>\n";
  out << "<text x=\"20\" y=\"" << (mt + H - mb) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 20 " << (mt + H - mb) / 2 << ")\">" << ylabel
      << " (log)</text>\n";

  if (have) {
    std::vector<std::pair<double, double>> good;
    for (const auto& p : pts)
      if (p.first > 0.0 && p.second > 0.0) good.push_back(p);
    std::sort(good.begin(), good.end());
    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : good) out << format_short(px(x)) << "," << format_short(py(y)) << " ";
    out << "\"/>\n";
    for (const auto& [x, y] : good) {
      out << "<circle cx=\"" << format_short(px(x)) << "\" cy=\"" << format_short(py(y))
          << "\" r=\"4\" fill=\"#d62728\"/>\n";
      out << "<text x=\"" << format_short(px(x) + 6) << "\" y=\"" << format_short(py(y) - 6)
          << "\" font-family=\"sans-serif\" font-size=\"11\">(" << format_short(x) << ", "
          << format_short(y) << ")</text>\n";
    }
  } else {
    out << "<text x=\"" << W / 2 << "\" y=\"" << H / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">no positive "
           "data</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw RunError("write failed: " + path);
}

}  // namespace smoothlab

#endif
