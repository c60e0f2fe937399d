#include "elicit/svg_chart.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "elicit/errors.hpp"
#include "elicit/rng.hpp"

namespace elicit {

namespace {

constexpr std::array<const char*, 6> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

/// Tick spacing of the form {1, 2, 5} * 10^k covering the range with
/// roughly the requested count.
std::vector<double> nice_ticks(double lo, double hi, int count) {
  const double span = hi - lo;
  const double raw = span / std::max(1, count);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  const double first = std::ceil(lo / step) * step;
  for (double t = first; t <= hi + step * 1e-9; t += step)
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  return ticks;
}

} // namespace

std::string strategy_color(const std::string& label) {
  if (label == "no-interaction") return "#444444";
  if (label == "random") return "#1f77b4";
  if (label == "largest-target") return "#2ca02c";
  if (label == "largest-product") return "#d62728";
  if (label == "largest-product-subset") return "#9467bd";
  if (label == "largest-target-subset") return "#8c564b";
  if (label == "random-subset") return "#17becf";
  return kPalette[hash_string(label) % kPalette.size()];
}

std::string render_line_chart(const ChartSpec& spec,
                              const std::vector<ChartSeries>& series) {
  if (series.empty()) throw ValidationError("chart needs at least one series");
  for (const ChartSeries& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size())
      throw ValidationError("series " + s.label + " has mismatched points");
    if (!s.yerr.empty() && s.yerr.size() != s.y.size())
      throw ValidationError("series " + s.label + " has mismatched error bars");
  }

  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  for (const ChartSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double err = s.yerr.empty() ? 0.0 : s.yerr[i];
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i] - err);
      y_hi = std::max(y_hi, s.y[i] + err);
    }
  }
  if (x_lo == x_hi) {
    x_lo -= 1.0;
    x_hi += 1.0;
  }
  if (y_lo == y_hi) {
    y_lo -= 1.0;
    y_hi += 1.0;
  }
  const double y_pad = (y_hi - y_lo) * 0.05;
  y_lo -= y_pad;
  y_hi += y_pad;
  if (y_lo > 0.0 && y_lo < (y_hi - y_lo) * 0.5) y_lo = 0.0;

  const double left = 64;
  const double right = spec.width - 16;
  const double top = 40;
  const double bottom = spec.height - 48;
  const auto px = [&](double x) {
    return left + (x - x_lo) / (x_hi - x_lo) * (right - left);
  };
  const auto py = [&](double y) {
    return bottom - (y - y_lo) / (y_hi - y_lo) * (bottom - top);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(spec.width) + "\" height=\"" +
         std::to_string(spec.height) + "\" viewBox=\"0 0 " +
         std::to_string(spec.width) + " " + std::to_string(spec.height) +
         "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt((left + right) / 2) +
         "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\" font-weight=\"bold\">" +
         escape(spec.title) + "</text>\n";

  for (const double t : nice_ticks(y_lo, y_hi, 5)) {
    const double y = py(t);
    svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(y) + "\" x2=\"" +
           fmt(right) + "\" y2=\"" + fmt(y) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           fmt_tick(t) + "</text>\n";
  }
  for (const double t : nice_ticks(x_lo, x_hi, 8)) {
    const double x = px(t);
    svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(bottom) + "\" x2=\"" +
           fmt(x) + "\" y2=\"" + fmt(bottom + 4) +
           "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(bottom + 17) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           fmt_tick(t) + "</text>\n";
  }
  svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" +
         fmt(left) + "\" y2=\"" + fmt(bottom) +
         "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(bottom) + "\" x2=\"" +
         fmt(right) + "\" y2=\"" + fmt(bottom) +
         "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + fmt((left + right) / 2) + "\" y=\"" +
         fmt(spec.height - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">" +
         escape(spec.x_label) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt((top + bottom) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 16 " +
         fmt((top + bottom) / 2) + ")\">" +
         escape(spec.y_label) + "</text>\n";

  for (const ChartSeries& s : series) {
    const std::string color = s.color.empty() ? strategy_color(s.label) : s.color;
    if (!s.yerr.empty()) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (s.yerr[i] <= 0.0) continue;
        const double x = px(s.x[i]);
        const double y0 = py(s.y[i] - s.yerr[i]);
        const double y1 = py(s.y[i] + s.yerr[i]);
        svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(y0) + "\" x2=\"" +
               fmt(x) + "\" y2=\"" + fmt(y1) + "\" stroke=\"" + color +
               "\" stroke-width=\"1\"/>\n";
        for (const double ye : {y0, y1})
          svg += "<line x1=\"" + fmt(x - 3) + "\" y1=\"" + fmt(ye) +
                 "\" x2=\"" + fmt(x + 3) + "\" y2=\"" + fmt(ye) +
                 "\" stroke=\"" + color + "\" stroke-width=\"1\"/>\n";
      }
    }
    if (s.x.size() > 1) {
      std::string pts;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) pts += ' ';
        pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i]));
      }
      svg += "<polyline fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    }
    for (std::size_t i = 0; i < s.x.size(); ++i)
      svg += "<circle cx=\"" + fmt(px(s.x[i])) + "\" cy=\"" +
             fmt(py(s.y[i])) + "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
  }

  double legend_y = top + 8;
  const double legend_x = right - 170;
  for (const ChartSeries& s : series) {
    const std::string color = s.color.empty() ? strategy_color(s.label) : s.color;
    svg += "<line x1=\"" + fmt(legend_x) + "\" y1=\"" + fmt(legend_y) +
           "\" x2=\"" + fmt(legend_x + 22) + "\" y2=\"" + fmt(legend_y) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(legend_x + 28) + "\" y=\"" + fmt(legend_y + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" +
           escape(s.label) + "</text>\n";
    legend_y += 16;
  }

  svg += "</svg>\n";
  return svg;
}

} // namespace elicit
