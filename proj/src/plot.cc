// Copyright 2026 The Ambix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ambix/plot.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <iomanip>
#include <sstream>

#include "ambix/error.h"

namespace ambix {
namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Num(double v) {
  std::ostringstream s;
  s << std::defaultfloat << std::setprecision(4) << v;
  return s.str();
}

// Round tick positions covering [lo, hi].
std::vector<double> Ticks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0)) return {lo};
  const double raw = span / 6;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(v);
  return t;
}

struct Frame {
  double x0, x1, y0, y1;
  bool log_x;
  double X(double x) const {
    const double a = log_x ? std::log10(x) : x, lo = log_x ? std::log10(x0) : x0,
                 hi = log_x ? std::log10(x1) : x1;
    return kLeft + (a - lo) / (hi - lo) * (kWidth - kLeft - kRight);
  }
  double Y(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

void Axes(std::ostringstream& svg, const Frame& f, const std::string& title,
          const std::string& xl, const std::string& yl) {
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  svg << "<rect x='" << kLeft << "' y='" << kTop << "' width='" << pw << "' height='" << ph
      << "' fill='none' stroke='#333'/>\n";
  std::vector<double> xt;
  if (f.log_x) {
    for (double d = std::pow(10.0, std::floor(std::log10(f.x0))); d <= f.x1; d *= 10)
      for (double m : {1.0, 2.0, 5.0})
        if (d * m >= f.x0 && d * m <= f.x1) xt.push_back(d * m);
  } else {
    xt = Ticks(f.x0, f.x1);
  }
  for (double t : xt) {
    const double x = f.X(t);
    svg << "<line x1='" << x << "' y1='" << kTop << "' x2='" << x << "' y2='" << kTop + ph
        << "' stroke='#ddd'/>\n<text x='" << x << "' y='" << kTop + ph + 18
        << "' font-size='11' text-anchor='middle'>" << Num(t) << "</text>\n";
  }
  for (double t : Ticks(f.y0, f.y1)) {
    const double y = f.Y(t);
    svg << "<line x1='" << kLeft << "' y1='" << y << "' x2='" << kLeft + pw << "' y2='" << y
        << "' stroke='#ddd'/>\n<text x='" << kLeft - 6 << "' y='" << y + 4
        << "' font-size='11' text-anchor='end'>" << Num(t) << "</text>\n";
  }
  svg << "<text x='" << kLeft + pw / 2 << "' y='" << kTop - 14
      << "' font-size='14' text-anchor='middle'>" << Escape(title) << "</text>\n"
      << "<text x='" << kLeft + pw / 2 << "' y='" << kHeight - 18
      << "' font-size='12' text-anchor='middle'>" << Escape(xl) << "</text>\n"
      << "<text transform='translate(18," << kTop + ph / 2
      << ") rotate(-90)' font-size='12' text-anchor='middle'>" << Escape(yl) << "</text>\n";
}

std::string Header() {
  std::ostringstream s;
  s << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
    << "' font-family='sans-serif'>\n<rect width='100%' height='100%' fill='white'/>\n";
  return s.str();
}

}  // namespace

std::string RenderLinePlot(const LinePlot& plot) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    Require(s.x.size() == s.y.size(), ErrorCode::kInvalidArgument,
            "series " + s.label + ": x and y lengths differ");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (plot.log_x && s.x[i] <= 0)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  const Frame f{x0, x1, y0 - pad, y1 + pad, plot.log_x};
  std::ostringstream svg;
  svg << Header();
  Axes(svg, f, plot.title, plot.x_label, plot.y_label);
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % std::size(kColors)];
    svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.6' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (plot.log_x && s.x[i] <= 0)) continue;
      svg << f.X(s.x[i]) << ',' << f.Y(s.y[i]) << ' ';
    }
    svg << "'/>\n";
    const double ly = kTop + 16 + 20 * k, lx = kWidth - kRight + 12;
    svg << "<line x1='" << lx << "' y1='" << ly << "' x2='" << lx + 24 << "' y2='" << ly
        << "' stroke='" << color << "' stroke-width='2'/>\n<text x='" << lx + 30 << "' y='"
        << ly + 4 << "' font-size='12'>" << Escape(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string RenderHeatPlot(const HeatPlot& plot) {
  Require(plot.x.size() == plot.y.size() && plot.x.size() == plot.value.size(),
          ErrorCode::kInvalidArgument, "heat plot: x, y and value lengths differ");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  double x0 = lo, x1 = -lo, y0 = lo, y1 = -lo;
  for (std::size_t i = 0; i < plot.value.size(); ++i) {
    lo = std::min(lo, plot.value[i]);
    hi = std::max(hi, plot.value[i]);
    x0 = std::min(x0, plot.x[i]);
    x1 = std::max(x1, plot.x[i]);
    y0 = std::min(y0, plot.y[i]);
    y1 = std::max(y1, plot.y[i]);
  }
  if (plot.value.empty()) lo = 0, hi = 1, x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (hi <= lo) hi = lo + 1e-12;
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  const Frame f{x0, x1, y0, y1, false};
  std::ostringstream svg;
  svg << Header();
  Axes(svg, f, plot.title, plot.x_label, plot.y_label);
  auto color = [&](double v) {
    // White to dark blue.
    const double t = (v - lo) / (hi - lo);
    const int r = static_cast<int>(255 * (1 - t) + 8 * t), g = static_cast<int>(255 * (1 - t) + 48 * t),
              b = static_cast<int>(255 * (1 - t) + 107 * t);
    std::ostringstream c;
    c << "rgb(" << r << ',' << g << ',' << b << ')';
    return c.str();
  };
  for (std::size_t i = 0; i < plot.value.size(); ++i)
    svg << "<circle cx='" << f.X(plot.x[i]) << "' cy='" << f.Y(plot.y[i]) << "' r='5' fill='"
        << color(plot.value[i]) << "' stroke='#999' stroke-width='0.3'/>\n";
  if (plot.has_marker) {
    const double mx = f.X(plot.marker_x), my = f.Y(plot.marker_y);
    svg << "<path d='M" << mx - 7 << ',' << my - 7 << " L" << mx + 7 << ',' << my + 7 << " M"
        << mx - 7 << ',' << my + 7 << " L" << mx + 7 << ',' << my - 7
        << "' stroke='#d62728' stroke-width='2.5'/>\n";
  }
  // Colour bar.
  const double bx = kWidth - kRight + 20, by = kTop, bh = kHeight - kTop - kBottom;
  for (int i = 0; i < 50; ++i) {
    const double v = hi - (hi - lo) * i / 49.0;
    svg << "<rect x='" << bx << "' y='" << by + bh * i / 50.0 << "' width='16' height='"
        << bh / 50.0 + 0.5 << "' fill='" << color(v) << "'/>\n";
  }
  svg << "<text x='" << bx + 22 << "' y='" << by + 10 << "' font-size='11'>" << Num(hi)
      << "</text>\n<text x='" << bx + 22 << "' y='" << by + bh << "' font-size='11'>" << Num(lo)
      << "</text>\n</svg>\n";
  return svg.str();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  Require(static_cast<bool>(out), ErrorCode::kIoError, "cannot write " + path);
  out << text;
  Require(static_cast<bool>(out), ErrorCode::kIoError, "failed writing " + path);
}

}  // namespace ambix
