// include/ssip/plot.hpp

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

#ifndef SSIP_PLOT_HPP_
#define SSIP_PLOT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "ssip/metrics.hpp"

namespace ssip {

/// Small static SVG emitter; every figure this toolkit produces is a file,
/// there is no interactive display.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  void add_scatter(const std::vector<double>& x, const std::vector<double>& y,
                   const std::string& color = "#1f5fa8");
  void add_line(const std::vector<double>& x, const std::vector<double>& y,
                const std::string& color = "#c44e52", bool dashed = false);
  void add_hline(double y, const std::string& color = "#777777");
  void add_annotation(const std::string& text);

  void save(const std::string& path) const;

 private:
  struct Series {
    enum class Kind { scatter, line, hline } kind;
    std::vector<double> x, y;
    std::string color;
    bool dashed = false;
  };

  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
  std::vector<std::string> annotations_;
};

/// Scatter of per-listener points with a regression line and an r
/// annotation (the hearing-loss correlation figures).
void write_correlation_plot(const std::string& path,
                            const std::vector<double>& x,
                            const std::vector<double>& y,
                            const LinearFit& fit, std::optional<double> r,
                            const std::string& title,
                            const std::string& x_label,
                            const std::string& y_label);

/// Metric-vs-support-count line plot with an optional horizontal baseline
/// reference (the support-count sweep figure).
void write_sweep_plot(const std::string& path,
                      const std::vector<int>& support_counts,
                      const std::vector<double>& values,
                      std::optional<double> baseline,
                      const std::string& metric_name);

}  // namespace ssip

#endif  // SSIP_PLOT_HPP_
