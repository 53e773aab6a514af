// src/plot.cpp

// Copyright 2026  The ssip authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "ssip/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ssip/errors.hpp"

namespace ssip {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 30.0;
constexpr double kMarginTop = 50.0;
constexpr double kMarginBottom = 60.0;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string fmt_tick(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void expand(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi <= lo) {
      lo -= 1.0;
      hi += 1.0;
      return;
    }
    const double m = 0.06 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

std::vector<double> ticks(const Range& r, int count = 5) {
  std::vector<double> out;
  const double raw_step = (r.hi - r.lo) / count;
  const double mag = std::pow(10.0, std::floor(std::log10(raw_step)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (mag * m >= raw_step) {
      step = mag * m;
      break;
    }
  }
  const double first = std::ceil(r.lo / step) * step;
  for (double v = first; v <= r.hi + 1e-12; v += step) {
    out.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
  }
  return out;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)) {}

void SvgPlot::add_scatter(const std::vector<double>& x,
                          const std::vector<double>& y,
                          const std::string& color) {
  if (x.size() != y.size()) {
    throw ShapeError("scatter series: x/y length mismatch");
  }
  series_.push_back(Series{Series::Kind::scatter, x, y, color, false});
}

void SvgPlot::add_line(const std::vector<double>& x,
                       const std::vector<double>& y, const std::string& color,
                       bool dashed) {
  if (x.size() != y.size()) {
    throw ShapeError("line series: x/y length mismatch");
  }
  series_.push_back(Series{Series::Kind::line, x, y, color, dashed});
}

void SvgPlot::add_hline(double y, const std::string& color) {
  series_.push_back(Series{Series::Kind::hline, {}, {y}, color, true});
}

void SvgPlot::add_annotation(const std::string& text) {
  annotations_.push_back(text);
}

void SvgPlot::save(const std::string& path) const {
  Range rx, ry;
  bool any = false;
  for (const auto& s : series_) {
    for (double v : s.x) {
      if (!any) {
        rx.lo = rx.hi = v;
        any = true;
      }
      rx.expand(v);
    }
    for (double v : s.y) ry.expand(v);
  }
  if (!any) {
    rx = Range{0.0, 1.0};
  }
  // Seed the y range from the first finite value so hlines participate.
  bool y_seeded = false;
  for (const auto& s : series_) {
    for (double v : s.y) {
      if (std::isfinite(v) && !y_seeded) {
        ry.lo = ry.hi = v;
        y_seeded = true;
      }
      ry.expand(v);
    }
  }
  rx.pad();
  ry.pad();

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double v) {
    return kMarginLeft + (v - rx.lo) / (rx.hi - rx.lo) * plot_w;
  };
  auto sy = [&](double v) {
    return kMarginTop + plot_h - (v - ry.lo) / (ry.hi - ry.lo) * plot_h;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title_
      << "</text>\n";

  // Axes.
  svg << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
      << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  for (double t : ticks(rx)) {
    const double px = sx(t);
    svg << "<line x1=\"" << fmt(px) << "\" y1=\"" << kMarginTop + plot_h
        << "\" x2=\"" << fmt(px) << "\" y2=\"" << kMarginTop + plot_h + 5
        << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << fmt(px) << "\" y=\"" << kMarginTop + plot_h + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << fmt_tick(t) << "</text>\n";
  }
  for (double t : ticks(ry)) {
    const double py = sy(t);
    svg << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << fmt(py)
        << "\" x2=\"" << kMarginLeft << "\" y2=\"" << fmt(py)
        << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << kMarginLeft - 9 << "\" y=\"" << fmt(py + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << fmt_tick(t) << "</text>\n";
  }
  svg << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\""
      << kHeight - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\">" << x_label_ << "</text>\n";
  svg << "<text x=\"18\" y=\"" << kMarginTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\" transform=\"rotate(-90 18 "
      << kMarginTop + plot_h / 2 << ")\">" << y_label_ << "</text>\n";

  for (const auto& s : series_) {
    if (s.kind == Series::Kind::scatter) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        svg << "<circle cx=\"" << fmt(sx(s.x[i])) << "\" cy=\""
            << fmt(sy(s.y[i])) << "\" r=\"3.5\" fill=\"" << s.color
            << "\" fill-opacity=\"0.8\"/>\n";
      }
    } else if (s.kind == Series::Kind::line) {
      svg << "<polyline fill=\"none\" stroke=\"" << s.color
          << "\" stroke-width=\"2\"";
      if (s.dashed) svg << " stroke-dasharray=\"6 4\"";
      svg << " points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        svg << fmt(sx(s.x[i])) << "," << fmt(sy(s.y[i])) << " ";
      }
      svg << "\"/>\n";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        svg << "<circle cx=\"" << fmt(sx(s.x[i])) << "\" cy=\""
            << fmt(sy(s.y[i])) << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      }
    } else {
      const double py = sy(s.y.front());
      svg << "<line x1=\"" << kMarginLeft << "\" y1=\"" << fmt(py) << "\" x2=\""
          << kMarginLeft + plot_w << "\" y2=\"" << fmt(py) << "\" stroke=\""
          << s.color << "\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
    }
  }

  double ay = kMarginTop + 16;
  for (const auto& a : annotations_) {
    svg << "<text x=\"" << kMarginLeft + plot_w - 8 << "\" y=\"" << ay
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"13\">" << a << "</text>\n";
    ay += 18;
  }
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out << svg.str();
}

void write_correlation_plot(const std::string& path,
                            const std::vector<double>& x,
                            const std::vector<double>& y,
                            const LinearFit& fit, std::optional<double> r,
                            const std::string& title,
                            const std::string& x_label,
                            const std::string& y_label) {
  SvgPlot plot(title, x_label, y_label);
  plot.add_scatter(x, y);
  if (!x.empty()) {
    const double lo = *std::min_element(x.begin(), x.end());
    const double hi = *std::max_element(x.begin(), x.end());
    plot.add_line({lo, hi},
                  {fit.intercept + fit.slope * lo, fit.intercept + fit.slope * hi},
                  "#c44e52", /*dashed=*/true);
  }
  std::ostringstream note;
  note.precision(3);
  if (r) {
    note << "r = " << *r;
  } else {
    note << "r undefined";
  }
  plot.add_annotation(note.str());
  plot.save(path);
}

void write_sweep_plot(const std::string& path,
                      const std::vector<int>& support_counts,
                      const std::vector<double>& values,
                      std::optional<double> baseline,
                      const std::string& metric_name) {
  if (support_counts.size() != values.size()) {
    throw ShapeError("sweep plot: count/value length mismatch");
  }
  SvgPlot plot(metric_name + " vs support count", "support (audio, score) pairs",
               metric_name);
  std::vector<double> xs(support_counts.begin(), support_counts.end());
  plot.add_line(xs, values, "#1f5fa8", /*dashed=*/false);
  if (baseline) {
    plot.add_hline(*baseline);
    plot.add_annotation("dashed: audiogram baseline");
  }
  plot.save(path);
}

}  // namespace ssip
