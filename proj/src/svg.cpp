#include "difq/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace difq {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b",
                                    "#17becf", "#7f7f7f"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);
constexpr std::size_t kMaxPointsPerSeries = 2000;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      const double c = 0.5 * (lo + hi);
      lo = c - 1.0;
      hi = c + 1.0;
    } else {
      const double p = 0.05 * (hi - lo);
      lo -= p;
      hi += p;
    }
  }
  double map(double v, double px_lo, double px_hi) const {
    return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
  }
};

}  // namespace

std::string render_svg(const std::vector<SvgPanel>& panels, int width,
                       int panel_height) {
  const double w = width;
  const double hgt = panel_height;
  const double total_h = hgt * static_cast<double>(std::max<std::size_t>(1, panels.size()));
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + num(w) +
       " " + num(total_h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  double oy = 0.0;
  for (const auto& panel : panels) {
    const double mx_l = 64.0, mx_r = 16.0, my_t = 28.0, my_b = 36.0;
    const double px0 = mx_l, px1 = w - mx_r;
    const double py0 = oy + hgt - my_b, py1 = oy + my_t;  // y grows downward

    Range rx, ry;
    for (const auto& se : panel.series) {
      for (double v : se.x) rx.include(v);
      for (double v : se.y) ry.include(v);
    }
    rx.pad();
    ry.pad();

    s += "<g>\n";
    s += "<text x=\"" + num(px0) + "\" y=\"" + num(oy + 18.0) +
         "\" font-weight=\"bold\">" + panel.title + "</text>\n";
    // frame
    s += "<rect x=\"" + num(px0) + "\" y=\"" + num(py1) + "\" width=\"" +
         num(px1 - px0) + "\" height=\"" + num(py0 - py1) +
         "\" fill=\"none\" stroke=\"#555\"/>\n";
    // ticks
    for (int k = 0; k <= 4; ++k) {
      const double fx = rx.lo + (rx.hi - rx.lo) * k / 4.0;
      const double px = rx.map(fx, px0, px1);
      s += "<line x1=\"" + num(px) + "\" y1=\"" + num(py0) + "\" x2=\"" +
           num(px) + "\" y2=\"" + num(py0 + 4.0) + "\" stroke=\"#555\"/>\n";
      s += "<text x=\"" + num(px) + "\" y=\"" + num(py0 + 18.0) +
           "\" text-anchor=\"middle\">" + num(fx) + "</text>\n";
      const double fy = ry.lo + (ry.hi - ry.lo) * k / 4.0;
      const double py = ry.map(fy, py0, py1);
      s += "<line x1=\"" + num(px0 - 4.0) + "\" y1=\"" + num(py) + "\" x2=\"" +
           num(px0) + "\" y2=\"" + num(py) + "\" stroke=\"#555\"/>\n";
      s += "<text x=\"" + num(px0 - 8.0) + "\" y=\"" + num(py + 4.0) +
           "\" text-anchor=\"end\">" + num(fy) + "</text>\n";
    }
    // zero line when the y range crosses zero
    if (ry.lo < 0.0 && ry.hi > 0.0) {
      const double py = ry.map(0.0, py0, py1);
      s += "<line x1=\"" + num(px0) + "\" y1=\"" + num(py) + "\" x2=\"" +
           num(px1) + "\" y2=\"" + num(py) +
           "\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n";
    }
    // axis labels
    s += "<text x=\"" + num(0.5 * (px0 + px1)) + "\" y=\"" +
         num(oy + hgt - 6.0) + "\" text-anchor=\"middle\" fill=\"#333\">" +
         panel.x_label + "</text>\n";
    s += "<text x=\"" + num(px0) + "\" y=\"" + num(py1 - 6.0) +
         "\" fill=\"#333\">" + panel.y_label + "</text>\n";

    // series
    std::size_t ci = 0;
    double legend_x = px1 - 10.0;
    for (const auto& se : panel.series) {
      const char* color = kPalette[ci % kPaletteSize];
      const std::size_t n = std::min(se.x.size(), se.y.size());
      const std::size_t stride =
          std::max<std::size_t>(1, n / kMaxPointsPerSeries);
      std::string pts;
      for (std::size_t k = 0; k < n; k += stride) {
        pts += num(rx.map(se.x[k], px0, px1)) + "," +
               num(ry.map(se.y[k], py0, py1)) + " ";
      }
      if (n > 0 && (n - 1) % stride != 0) {
        pts += num(rx.map(se.x[n - 1], px0, px1)) + "," +
               num(ry.map(se.y[n - 1], py0, py1));
      }
      s += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.2\" points=\"" + pts + "\"/>\n";
      if (!se.label.empty()) {
        s += "<text x=\"" + num(legend_x) + "\" y=\"" + num(py1 + 14.0) +
             "\" text-anchor=\"end\" fill=\"" + color + "\">" + se.label +
             "</text>\n";
        legend_x -= 12.0 + 7.0 * static_cast<double>(se.label.size());
      }
      ++ci;
    }
    s += "</g>\n";
    oy += hgt;
  }
  s += "</svg>\n";
  return s;
}

}  // namespace difq
