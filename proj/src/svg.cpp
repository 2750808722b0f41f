#include "thinfilm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace thinfilm {

namespace {

constexpr double kW = 640.0, kH = 480.0;
constexpr double kMargin = 64.0;

double map_x(double lx, double lx0, double lx1) {
  return kMargin + (lx - lx0) / (lx1 - lx0) * (kW - 2.0 * kMargin);
}

double map_y(double ly, double ly0, double ly1) {
  return kH - kMargin - (ly - ly0) / (ly1 - ly0) * (kH - 2.0 * kMargin);
}

std::string num(double v) { return format_double(v); }

}  // namespace

std::string render_sweep_svg(const std::vector<SweepRecord>& records, const std::string& title) {
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 480\" width=\"640\" height=\"480\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"28\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"14\">" +
         title + "</text>\n";

  std::vector<std::pair<double, double>> pts;  // (log10 eps, log10 scaled)
  double pred = std::numeric_limits<double>::quiet_NaN();
  for (const SweepRecord& r : records) {
    if (r.eps > 0.0 && r.scaled_value > 0.0)
      pts.emplace_back(std::log10(r.eps), std::log10(r.scaled_value));
    if (std::isfinite(r.predicted_limit) && r.predicted_limit > 0.0) pred = r.predicted_limit;
  }
  if (pts.empty()) {
    svg += "<text x=\"320\" y=\"240\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">no positive data</text>\n</svg>\n";
    return svg;
  }
  double lx0 = pts[0].first, lx1 = pts[0].first, ly0 = pts[0].second, ly1 = pts[0].second;
  for (const auto& [x, y] : pts) {
    lx0 = std::min(lx0, x);
    lx1 = std::max(lx1, x);
    ly0 = std::min(ly0, y);
    ly1 = std::max(ly1, y);
  }
  if (std::isfinite(pred)) {
    ly0 = std::min(ly0, std::log10(pred));
    ly1 = std::max(ly1, std::log10(pred));
  }
  const double padx = std::max(0.05, 0.08 * (lx1 - lx0));
  const double pady = std::max(0.05, 0.08 * (ly1 - ly0));
  lx0 -= padx;
  lx1 += padx;
  ly0 -= pady;
  ly1 += pady;

  // frame
  svg += "<rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) + "\" width=\"" + num(kW - 2 * kMargin) +
         "\" height=\"" + num(kH - 2 * kMargin) + "\" fill=\"none\" stroke=\"black\"/>\n";

  // decade ticks
  for (int e = int(std::floor(lx0)); e <= int(std::ceil(lx1)); ++e) {
    if (e < lx0 || e > lx1) continue;
    const double x = map_x(e, lx0, lx1);
    svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(kH - kMargin) + "\" x2=\"" + num(x) + "\" y2=\"" +
           num(kMargin) + "\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n";
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(kH - kMargin + 18.0) +
           "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">1e" + std::to_string(e) +
           "</text>\n";
  }
  for (int e = int(std::floor(ly0)); e <= int(std::ceil(ly1)); ++e) {
    if (e < ly0 || e > ly1) continue;
    const double y = map_y(e, ly0, ly1);
    svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kW - kMargin) + "\" y2=\"" +
           num(y) + "\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n";
    svg += "<text x=\"" + num(kMargin - 6.0) + "\" y=\"" + num(y + 4.0) +
           "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">1e" + std::to_string(e) +
           "</text>\n";
  }
  svg += "<text x=\"320\" y=\"" + num(kH - 16.0) +
         "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">eps</text>\n";
  svg += "<text x=\"16\" y=\"240\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" "
         "transform=\"rotate(-90 16 240)\">scaled energy</text>\n";

  if (std::isfinite(pred)) {
    const double y = map_y(std::log10(pred), ly0, ly1);
    svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kW - kMargin) + "\" y2=\"" +
           num(y) + "\" stroke=\"#d62728\" stroke-dasharray=\"6,4\"/>\n";
    svg += "<text x=\"" + num(kW - kMargin - 4.0) + "\" y=\"" + num(y - 6.0) +
           "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\" fill=\"#d62728\">predicted " +
         num(pred) + "</text>\n";
  }

  std::string poly = "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) poly += ' ';
    poly += num(map_x(pts[i].first, lx0, lx1)) + "," + num(map_y(pts[i].second, ly0, ly1));
  }
  poly += "\"/>\n";
  svg += poly;
  for (const auto& [x, y] : pts)
    svg += "<circle cx=\"" + num(map_x(x, lx0, lx1)) + "\" cy=\"" + num(map_y(y, ly0, ly1)) +
           "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  svg += "</svg>\n";
  return svg;
}

void write_sweep_svg(const std::vector<SweepRecord>& records, const std::string& title,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot open '" + path + "' for writing");
  out << render_sweep_svg(records, title);
  if (!out) throw Error(Errc::io_error, "write failed for '" + path + "'");
}

}  // namespace thinfilm
