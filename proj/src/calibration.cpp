// src/calibration.cpp

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

#include "ssip/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ssip/errors.hpp"

namespace ssip {

namespace {

constexpr int kRequiredFrequencies[] = {500, 1000, 2000};

/// Piecewise-linear evaluation with endpoint clamping.
double eval_curve(const CalibrationCurve& c, double level) {
  const auto& pts = c.breakpoints;
  if (level <= pts.front().first) return pts.front().second;
  if (level >= pts.back().first) return pts.back().second;
  // First breakpoint with level strictly above the query.
  auto hi = std::upper_bound(
      pts.begin(), pts.end(), level,
      [](double v, const std::pair<double, double>& p) { return v < p.first; });
  auto lo = hi - 1;
  const double span = hi->first - lo->first;
  const double t = (level - lo->first) / span;
  return lo->second + t * (hi->second - lo->second);
}

}  // namespace

double average_hearing_loss(const Audiogram& a) {
  double sum = 0.0;
  for (int f : kRequiredFrequencies) {
    auto it = a.thresholds.find(f);
    if (it == a.thresholds.end()) {
      throw IncompleteAudiogram("audiogram is missing the " +
                                std::to_string(f) + " Hz threshold");
    }
    sum += it->second;
  }
  return sum / 3.0;
}

CalibrationCurveSet::CalibrationCurveSet(std::vector<CalibrationCurve> curves)
    : curves_(std::move(curves)) {
  if (curves_.size() < 2) {
    throw InvalidCurve("need at least two hearing-loss curves, got " +
                       std::to_string(curves_.size()));
  }
  std::sort(curves_.begin(), curves_.end(),
            [](const CalibrationCurve& a, const CalibrationCurve& b) {
              return a.hearing_loss_db < b.hearing_loss_db;
            });
  for (std::size_t i = 1; i < curves_.size(); ++i) {
    if (curves_[i].hearing_loss_db == curves_[i - 1].hearing_loss_db) {
      throw InvalidCurve("duplicate hearing-loss index " +
                         std::to_string(curves_[i].hearing_loss_db));
    }
  }
  for (const auto& c : curves_) {
    if (c.breakpoints.size() < 2) {
      throw InvalidCurve("curve hl=" + std::to_string(c.hearing_loss_db) +
                         " needs at least two breakpoints");
    }
    for (std::size_t i = 0; i < c.breakpoints.size(); ++i) {
      const auto& [level, value] = c.breakpoints[i];
      if (!std::isfinite(level) || !std::isfinite(value)) {
        throw InvalidCurve("non-finite breakpoint in curve hl=" +
                           std::to_string(c.hearing_loss_db));
      }
      if (value < 0.0 || value > 100.0) {
        throw InvalidCurve("intelligibility outside [0, 100] in curve hl=" +
                           std::to_string(c.hearing_loss_db));
      }
      if (i > 0) {
        if (level <= c.breakpoints[i - 1].first) {
          throw InvalidCurve("levels not strictly increasing in curve hl=" +
                             std::to_string(c.hearing_loss_db));
        }
        if (value < c.breakpoints[i - 1].second) {
          throw InvalidCurve("decreasing segment in curve hl=" +
                             std::to_string(c.hearing_loss_db));
        }
      }
    }
  }
}

double CalibrationCurveSet::value(double hearing_loss_db,
                                  double level_db_spl) const {
  if (hearing_loss_db <= curves_.front().hearing_loss_db) {
    return eval_curve(curves_.front(), level_db_spl);
  }
  if (hearing_loss_db >= curves_.back().hearing_loss_db) {
    return eval_curve(curves_.back(), level_db_spl);
  }
  auto hi = std::upper_bound(curves_.begin(), curves_.end(), hearing_loss_db,
                             [](double v, const CalibrationCurve& c) {
                               return v < c.hearing_loss_db;
                             });
  auto lo = hi - 1;
  const double t = (hearing_loss_db - lo->hearing_loss_db) /
                   (hi->hearing_loss_db - lo->hearing_loss_db);
  const double v_lo = eval_curve(*lo, level_db_spl);
  const double v_hi = eval_curve(*hi, level_db_spl);
  return v_lo + t * (v_hi - v_lo);
}

double calibrate_score_raw(double s0, double l0_db_spl, double l1_db_spl,
                           double hearing_loss_db,
                           const CalibrationCurveSet& cs) {
  return s0 + cs.value(hearing_loss_db, l1_db_spl) -
         cs.value(hearing_loss_db, l0_db_spl);
}

Score calibrate_score(const Score& s0, double l0_db_spl, double l1_db_spl,
                      double hearing_loss_db, const CalibrationCurveSet& cs) {
  const double raw = calibrate_score_raw(s0.known_value(), l0_db_spl,
                                         l1_db_spl, hearing_loss_db, cs);
  return Score(std::clamp(raw, 0.0, 100.0));
}

CalibrationCurveSet load_curves(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open curve file: " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line != "ssip-curves v1") {
    throw FormatError("curve file must start with 'ssip-curves v1': " + path);
  }

  std::vector<CalibrationCurve> curves;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "hl") {
      double hl;
      if (!(ls >> hl)) {
        throw FormatError(path + ":" + std::to_string(line_no) +
                          ": expected 'hl <dB>'");
      }
      curves.push_back(CalibrationCurve{hl, {}});
    } else {
      if (curves.empty()) {
        throw FormatError(path + ":" + std::to_string(line_no) +
                          ": breakpoint before any 'hl' header");
      }
      double level, value;
      std::istringstream pair_line(line);
      if (!(pair_line >> level >> value)) {
        throw FormatError(path + ":" + std::to_string(line_no) +
                          ": expected '<level> <intelligibility>'");
      }
      curves.back().breakpoints.emplace_back(level, value);
    }
  }
  if (curves.empty()) {
    throw FormatError("curve file defines no curves: " + path);
  }
  return CalibrationCurveSet(std::move(curves));
}

void save_curves(const std::string& path, const CalibrationCurveSet& cs) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out.precision(17);  // doubles round-trip exactly
  out << "ssip-curves v1\n";
  for (const auto& c : cs.curves()) {
    out << "hl " << c.hearing_loss_db << "\n";
    for (const auto& [level, value] : c.breakpoints) {
      out << level << " " << value << "\n";
    }
  }
  if (!out) {
    throw IoError("short write to " + path);
  }
}

CalibrationCurveSet default_curves() {
  // Sigmoid rising from 0 to 100 over roughly 30 dB, centred 35 dB above
  // the hearing loss. Conductive loss acts as a broadband attenuation, so
  // each curve is the normal-hearing curve shifted right by HL.
  std::vector<CalibrationCurve> curves;
  for (double hl : {0.0, 20.0, 40.0, 60.0, 80.0}) {
    CalibrationCurve c;
    c.hearing_loss_db = hl;
    for (double level = 0.0; level <= 130.0 + 1e-9; level += 5.0) {
      const double x = (level - 35.0 - hl) / 6.0;
      const double pct = 100.0 / (1.0 + std::exp(-x));
      c.breakpoints.emplace_back(level, pct);
    }
    curves.push_back(std::move(c));
  }
  return CalibrationCurveSet(std::move(curves));
}

}  // namespace ssip
