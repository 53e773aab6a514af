// include/ssip/calibration.hpp

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

#ifndef SSIP_CALIBRATION_HPP_
#define SSIP_CALIBRATION_HPP_

#include <map>
#include <string>
#include <vector>

#include "ssip/score.hpp"

namespace ssip {

/// Pure-tone thresholds, frequency (Hz) -> hearing level (dB HL).
/// Must contain 500, 1000 and 2000 Hz for average_hearing_loss.
struct Audiogram {
  std::map<int, double> thresholds;

  bool empty() const { return thresholds.empty(); }
};

/// Arithmetic mean of the 500/1000/2000 Hz thresholds.
/// Throws IncompleteAudiogram if any of the three is missing.
double average_hearing_loss(const Audiogram& a);

/// One monotone piecewise-linear level->intelligibility function, indexed by
/// the average hearing loss it was measured at.
struct CalibrationCurve {
  double hearing_loss_db = 0.0;
  // (presentation level dB SPL, intelligibility %) breakpoints,
  // strictly increasing in level, non-decreasing in intelligibility.
  std::vector<std::pair<double, double>> breakpoints;
};

/// Family of level-intelligibility curves for conductive hearing loss,
/// covering a range of average hearing-loss levels. Evaluation interpolates
/// linearly along both the level axis and the hearing-loss axis and clamps
/// to the nearest tabulated endpoint outside the covered range.
class CalibrationCurveSet {
 public:
  /// Validates and takes ownership. Throws InvalidCurve on a decreasing
  /// segment, an out-of-range intelligibility, fewer than two curves or
  /// fewer than two breakpoints per curve.
  explicit CalibrationCurveSet(std::vector<CalibrationCurve> curves);

  /// C_hl(level): intelligibility percent at the given presentation level
  /// for a listener with the given average hearing loss.
  double value(double hearing_loss_db, double level_db_spl) const;

  const std::vector<CalibrationCurve>& curves() const { return curves_; }

 private:
  std::vector<CalibrationCurve> curves_;  // sorted by hearing_loss_db
};

/// Level-shift score calibration. A score s0 measured at presentation level
/// l0 becomes, at level l1:
///
///   s1 = s0 + C_hl(l1) - C_hl(l0)
///
/// clamped to [0, 100]. Throws UnknownScore if s0 is the sentinel.
Score calibrate_score(const Score& s0, double l0_db_spl, double l1_db_spl,
                      double hearing_loss_db, const CalibrationCurveSet& cs);

/// Unclamped variant, used by tests that check the algebra of the formula.
double calibrate_score_raw(double s0, double l0_db_spl, double l1_db_spl,
                           double hearing_loss_db,
                           const CalibrationCurveSet& cs);

/// Parses a curve file. The format is line based:
///
///   ssip-curves v1
///   # comment
///   hl <average hearing loss dB>
///   <level dB SPL> <intelligibility percent>
///   ...
///
/// Throws IoError / FormatError / InvalidCurve.
CalibrationCurveSet load_curves(const std::string& path);

/// Writes a curve set in the same format (used by `prepare` to copy the
/// curve file into its output directory).
void save_curves(const std::string& path, const CalibrationCurveSet& cs);

/// The curve set shipped with the toolkit: sigmoid-shaped functions shifted
/// right by the hearing loss, covering HL 0..80 dB. Plausible defaults for
/// testing the pipeline, not measured clinical data.
CalibrationCurveSet default_curves();

}  // namespace ssip

#endif  // SSIP_CALIBRATION_HPP_
