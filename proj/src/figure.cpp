#include "anylr/figure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "anylr/format.hpp"

namespace anylr {
namespace {

constexpr double kWidth = 820.0;
constexpr double kPanelH = 280.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 640.0;  // legend sits to the right of this edge
constexpr double kTop = 48.0;
constexpr double kGap = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
constexpr int kPaletteSize = 8;

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return std::string(buf);
}

std::string escape(const std::string& text) {
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

struct Range {
  double lo = 0.0, hi = 1.0;
  bool seen = false;

  void add(double v) {
    if (!seen) {
      lo = hi = v;
      seen = true;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void finish() {
    if (!seen) {
      lo = 0.0;
      hi = 1.0;
      return;
    }
    if (hi - lo < 1e-12) {
      double pad = std::max(0.5, 0.1 * std::abs(lo));
      lo -= pad;
      hi += pad;
    } else {
      double pad = 0.05 * (hi - lo);
      lo -= pad;
      hi += pad;
    }
  }
};

// 1-2-5 ladder ticks covering [lo, hi] with about four intervals.
std::vector<double> linear_ticks(double lo, double hi) {
  double span = hi - lo;
  double raw = span / 4.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double norm = raw / mag;
  double step = (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0) * mag;
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
    ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  return ticks;
}

// Tick positions in log10 space: whole decades when the span allows, the
// linear ladder mapped through log10 otherwise.
std::vector<double> log_ticks(double log_lo, double log_hi) {
  std::vector<double> ticks;
  for (double k = std::ceil(log_lo); k <= std::floor(log_hi) + 1e-9; k += 1.0)
    ticks.push_back(k);
  if (ticks.size() >= 2) return ticks;
  ticks.clear();
  for (double t : linear_ticks(std::pow(10.0, log_lo), std::pow(10.0, log_hi)))
    if (t > 0.0) ticks.push_back(std::log10(t));
  return ticks;
}

struct Panel {
  double top_y = 0.0;
  bool log_y = false;
  Range xr, yr;  // log10 space for x (and y when log_y)

  double map_x(double lx) const {
    return kLeft + (lx - xr.lo) / (xr.hi - xr.lo) * (kRight - kLeft);
  }
  double map_y(double vy) const {
    return top_y + kPanelH - (vy - yr.lo) / (yr.hi - yr.lo) * kPanelH;
  }
};

void draw_frame(std::ostringstream& svg, const Panel& p,
                const std::string& ylabel, const std::string& xlabel) {
  svg << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(p.top_y) << "\" width=\""
      << px(kRight - kLeft) << "\" height=\"" << px(kPanelH)
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  for (double lx : log_ticks(p.xr.lo, p.xr.hi)) {
    double X = p.map_x(lx);
    svg << "<line x1=\"" << px(X) << "\" y1=\"" << px(p.top_y + kPanelH)
        << "\" x2=\"" << px(X) << "\" y2=\"" << px(p.top_y + kPanelH + 5)
        << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << px(X) << "\" y=\"" << px(p.top_y + kPanelH + 18)
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\" "
           "text-anchor=\"middle\">"
        << escape(fmt_g(std::pow(10.0, lx))) << "</text>\n";
  }

  std::vector<double> yticks =
      p.log_y ? log_ticks(p.yr.lo, p.yr.hi) : linear_ticks(p.yr.lo, p.yr.hi);
  for (double ty : yticks) {
    double Y = p.map_y(ty);
    if (Y < p.top_y - 1e-6 || Y > p.top_y + kPanelH + 1e-6) continue;
    svg << "<line x1=\"" << px(kLeft - 5) << "\" y1=\"" << px(Y) << "\" x2=\""
        << px(kLeft) << "\" y2=\"" << px(Y)
        << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(Y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\" "
           "text-anchor=\"end\">"
        << escape(fmt_g(p.log_y ? std::pow(10.0, ty) : ty)) << "</text>\n";
  }

  svg << "<text x=\"" << px(kLeft + (kRight - kLeft) / 2) << "\" y=\""
      << px(p.top_y + kPanelH + 36)
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\" "
         "text-anchor=\"middle\">"
      << escape(xlabel) << "</text>\n";
  svg << "<text x=\"" << px(kLeft - 56) << "\" y=\""
      << px(p.top_y + kPanelH / 2)
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 " << px(kLeft - 56)
      << " " << px(p.top_y + kPanelH / 2) << ")\">" << escape(ylabel)
      << "</text>\n";
}

bool placeable(double x, double y, bool log_y) {
  if (!std::isfinite(x) || !std::isfinite(y) || x <= 0.0) return false;
  return !log_y || y > 0.0;
}

void draw_panel(std::ostringstream& svg, Panel& p,
                const std::vector<FigureSeries>& series,
                const std::string& ylabel, const std::string& xlabel,
                bool with_legend) {
  for (const FigureSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!placeable(s.x[i], s.y[i], p.log_y)) continue;
      p.xr.add(std::log10(s.x[i]));
      p.yr.add(p.log_y ? std::log10(s.y[i]) : s.y[i]);
    }
  }
  bool empty = !p.xr.seen || !p.yr.seen;
  p.xr.finish();
  p.yr.finish();
  draw_frame(svg, p, ylabel, xlabel);
  if (empty) {
    svg << "<text x=\"" << px(kLeft + (kRight - kLeft) / 2) << "\" y=\""
        << px(p.top_y + kPanelH / 2)
        << "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#888888\" "
           "text-anchor=\"middle\">no plottable points</text>\n";
    return;
  }

  if (!p.log_y && p.yr.lo < 0.0 && p.yr.hi > 0.0) {
    double Y = p.map_y(0.0);
    svg << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(Y) << "\" x2=\""
        << px(kRight) << "\" y2=\"" << px(Y)
        << "\" stroke=\"#999999\" stroke-width=\"1\" "
           "stroke-dasharray=\"4 3\"/>\n";
  }

  for (std::size_t si = 0; si < series.size(); ++si) {
    const FigureSeries& s = series[si];
    const char* color = kPalette[si % kPaletteSize];
    std::string points;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!placeable(s.x[i], s.y[i], p.log_y)) continue;
      double X = p.map_x(std::log10(s.x[i]));
      double Y = p.map_y(p.log_y ? std::log10(s.y[i]) : s.y[i]);
      if (!points.empty()) points += ' ';
      points += px(X) + "," + px(Y);
    }
    if (points.empty()) continue;
    svg << "<polyline points=\"" << points << "\" fill=\"none\" stroke=\""
        << color << "\" stroke-width=\"1.6\"/>\n";
    if (with_legend) {
      double ly = p.top_y + 14.0 + 18.0 * static_cast<double>(si);
      svg << "<line x1=\"" << px(kRight + 12) << "\" y1=\"" << px(ly)
          << "\" x2=\"" << px(kRight + 34) << "\" y2=\"" << px(ly)
          << "\" stroke=\"" << color << "\" stroke-width=\"1.6\"/>\n";
      svg << "<text x=\"" << px(kRight + 40) << "\" y=\"" << px(ly + 4)
          << "\" font-family=\"sans-serif\" font-size=\"11\" "
             "fill=\"#333333\">"
          << escape(s.label) << "</text>\n";
    }
  }
}

}  // namespace

std::string render_two_panel_svg(const std::string& title,
                                 const std::vector<FigureSeries>& top,
                                 const std::string& top_ylabel,
                                 const std::vector<FigureSeries>& bottom,
                                 const std::string& bottom_ylabel,
                                 const std::string& xlabel) {
  double height = kTop + 2 * kPanelH + kGap + 48.0;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(kWidth)
      << "\" height=\"" << px(height) << "\" viewBox=\"0 0 " << px(kWidth)
      << " " << px(height) << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << px(kWidth) << "\" height=\""
      << px(height) << "\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"" << px(kWidth / 2) << "\" y=\"24\" "
         "font-family=\"sans-serif\" font-size=\"14\" fill=\"#111111\" "
         "text-anchor=\"middle\">"
      << escape(title) << "</text>\n";

  Panel top_panel;
  top_panel.top_y = kTop;
  top_panel.log_y = true;
  draw_panel(svg, top_panel, top, top_ylabel, xlabel, true);

  Panel bottom_panel;
  bottom_panel.top_y = kTop + kPanelH + kGap;
  bottom_panel.log_y = false;
  draw_panel(svg, bottom_panel, bottom, bottom_ylabel, xlabel, true);

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace anylr
