// src/metrics.cpp

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

#include "ssip/metrics.hpp"

#include <cmath>
#include <fstream>

#include "ssip/errors.hpp"

namespace ssip {

using nlohmann::json;

double rmse(const std::vector<double>& pred,
            const std::vector<double>& truth) {
  if (pred.size() != truth.size()) {
    throw ShapeError("rmse: " + std::to_string(pred.size()) +
                     " predictions vs " + std::to_string(truth.size()) +
                     " targets");
  }
  if (pred.empty()) {
    throw EmptyInput("rmse of empty sequences");
  }
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - truth[i];
    sum_sq += e * e;
  }
  return std::sqrt(sum_sq / static_cast<double>(pred.size()));
}

std::optional<double> ncc(const std::vector<double>& pred,
                          const std::vector<double>& truth) {
  if (pred.size() != truth.size()) {
    throw ShapeError("ncc: " + std::to_string(pred.size()) +
                     " predictions vs " + std::to_string(truth.size()) +
                     " targets");
  }
  if (pred.size() < 2) {
    throw EmptyInput("ncc needs at least two points");
  }
  const double n = static_cast<double>(pred.size());
  double mean_p = 0.0, mean_t = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mean_p += pred[i];
    mean_t += truth[i];
  }
  mean_p /= n;
  mean_t /= n;
  double cov = 0.0, var_p = 0.0, var_t = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dp = pred[i] - mean_p;
    const double dt = truth[i] - mean_t;
    cov += dp * dt;
    var_p += dp * dp;
    var_t += dt * dt;
  }
  if (var_p == 0.0 || var_t == 0.0) {
    return std::nullopt;
  }
  return cov / (std::sqrt(var_p) * std::sqrt(var_t));
}

namespace {

json optional_to_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

std::optional<double> optional_from_json(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

json MetricsReport::to_json() const {
  json j;
  j["rmse"] = rmse;
  j["ncc"] = optional_to_json(ncc);
  j["ncc_defined"] = ncc.has_value();
  j["n_queries"] = n_queries;
  j["n_support"] = n_support;
  j["clamped"] = clamped;
  j["fold_index"] = fold_index;
  json per = json::object();
  for (const auto& [listener, m] : per_listener) {
    per[listener] = {{"rmse", m.rmse},
                     {"ncc", optional_to_json(m.ncc)},
                     {"n_queries", m.n_queries}};
  }
  j["per_listener"] = std::move(per);
  return j;
}

MetricsReport MetricsReport::from_json(const json& j) {
  MetricsReport r;
  try {
    r.rmse = j.at("rmse").get<double>();
    r.ncc = optional_from_json(j, "ncc");
    r.n_queries = j.value("n_queries", 0);
    r.n_support = j.value("n_support", 0);
    r.clamped = j.value("clamped", true);
    r.fold_index = j.value("fold_index", 0);
    if (j.contains("per_listener")) {
      for (const auto& [listener, m] : j.at("per_listener").items()) {
        PerListenerMetrics pm;
        pm.rmse = m.at("rmse").get<double>();
        pm.ncc = optional_from_json(m, "ncc");
        pm.n_queries = m.value("n_queries", 0);
        r.per_listener[listener] = pm;
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("metrics report: ") + e.what());
  }
  return r;
}

void MetricsReport::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out << to_json().dump(2) << "\n";
}

MetricsReport MetricsReport::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open metrics report: " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return from_json(j);
}

LinearFit least_squares(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw ShapeError("least_squares: length mismatch");
  }
  if (x.empty()) {
    throw EmptyInput("least_squares of empty sequences");
  }
  const double n = static_cast<double>(x.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;
  double cov = 0.0, var_x = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cov += (x[i] - mean_x) * (y[i] - mean_y);
    var_x += (x[i] - mean_x) * (x[i] - mean_x);
  }
  LinearFit fit;
  fit.slope = var_x == 0.0 ? 0.0 : cov / var_x;
  fit.intercept = mean_y - fit.slope * mean_x;
  return fit;
}

json CorrelationReport::to_json() const {
  json j;
  j["r_hl_intelligibility"] = optional_to_json(r_hl_intelligibility);
  j["r_hl_level"] = optional_to_json(r_hl_level);
  j["fit_intelligibility"] = {{"slope", fit_intelligibility.slope},
                              {"intercept", fit_intelligibility.intercept}};
  j["fit_level"] = {{"slope", fit_level.slope},
                    {"intercept", fit_level.intercept}};
  json pts = json::array();
  for (const auto& p : points) {
    pts.push_back({{"listener_id", p.listener_id},
                   {"hearing_loss", p.hearing_loss},
                   {"mean_intelligibility", p.mean_intelligibility},
                   {"mean_level", p.mean_level}});
  }
  j["listeners"] = std::move(pts);
  return j;
}

CorrelationReport listener_correlation_report(
    const std::vector<Sample>& samples) {
  if (samples.empty()) {
    throw EmptyInput("no samples for the correlation report");
  }
  CorrelationReport report;
  for (const auto& [listener, pool] : group_by_listener(samples)) {
    double sum_score = 0.0, sum_level = 0.0;
    int n = 0;
    const Audiogram* audiogram = nullptr;
    for (const Sample& s : pool) {
      if (s.audiogram) {
        audiogram = &*s.audiogram;
      }
      if (!s.score.is_known()) continue;
      if (!s.original_level_db_spl) {
        throw EmptyInput("sample '" + s.sample_id + "' has no level metadata");
      }
      sum_score += s.score.value;
      sum_level += *s.original_level_db_spl;
      ++n;
    }
    if (audiogram == nullptr) {
      throw IncompleteAudiogram("listener '" + listener + "' has no audiogram");
    }
    if (n == 0) {
      throw EmptyInput("listener '" + listener + "' has no scored samples");
    }
    CorrelationReport::ListenerPoint p;
    p.listener_id = listener;
    p.hearing_loss = average_hearing_loss(*audiogram);
    p.mean_intelligibility = sum_score / n;
    p.mean_level = sum_level / n;
    report.points.push_back(std::move(p));
  }

  std::vector<double> hl, intel, level;
  for (const auto& p : report.points) {
    hl.push_back(p.hearing_loss);
    intel.push_back(p.mean_intelligibility);
    level.push_back(p.mean_level);
  }
  if (hl.size() >= 2) {
    report.r_hl_intelligibility = ncc(hl, intel);
    report.r_hl_level = ncc(hl, level);
    report.fit_intelligibility = least_squares(hl, intel);
    report.fit_level = least_squares(hl, level);
  }
  return report;
}

}  // namespace ssip
