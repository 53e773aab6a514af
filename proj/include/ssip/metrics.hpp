// include/ssip/metrics.hpp

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

#ifndef SSIP_METRICS_HPP_
#define SSIP_METRICS_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssip/dataset.hpp"

namespace ssip {

/// Root mean square error. Throws ShapeError on length mismatch,
/// EmptyInput on empty sequences.
double rmse(const std::vector<double>& pred, const std::vector<double>& truth);

/// Pearson correlation of predictions against ground truth. Returns
/// nullopt when either sequence has zero variance (reported downstream as
/// NaN with a flag). Throws ShapeError / EmptyInput (length < 2).
std::optional<double> ncc(const std::vector<double>& pred,
                          const std::vector<double>& truth);

struct PerListenerMetrics {
  double rmse = 0.0;
  std::optional<double> ncc;
  int n_queries = 0;
};

/// Results of one evaluation run. Headline rmse/ncc pool every query across
/// listeners; per-listener values are supplementary.
struct MetricsReport {
  double rmse = 0.0;
  std::optional<double> ncc;
  int n_queries = 0;
  std::map<std::string, PerListenerMetrics> per_listener;
  int n_support = 0;
  bool clamped = true;  // metrics computed on clamped reported scores
  int fold_index = 0;

  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static MetricsReport load(const std::string& path);
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares of y on x.
LinearFit least_squares(const std::vector<double>& x,
                        const std::vector<double>& y);

/// Per-listener summary behind the hearing-loss correlation analyses:
/// average hearing loss vs mean intelligibility, and average hearing loss
/// vs mean presentation level.
struct CorrelationReport {
  struct ListenerPoint {
    std::string listener_id;
    double hearing_loss = 0.0;         // dB, mean of 500/1k/2k thresholds
    double mean_intelligibility = 0.0; // percent
    double mean_level = 0.0;           // dB SPL
  };

  std::vector<ListenerPoint> points;
  std::optional<double> r_hl_intelligibility;
  std::optional<double> r_hl_level;
  LinearFit fit_intelligibility;  // intelligibility ~ hearing loss
  LinearFit fit_level;            // level ~ hearing loss

  nlohmann::json to_json() const;
};

/// Builds the correlation report from labeled samples. Every listener needs
/// an audiogram, at least one scored sample and level metadata; violations
/// raise IncompleteAudiogram / EmptyInput. With a single listener the
/// correlations are undefined and stay nullopt.
CorrelationReport listener_correlation_report(
    const std::vector<Sample>& samples);

}  // namespace ssip

#endif  // SSIP_METRICS_HPP_
