// include/ssip/signal.hpp

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

#ifndef SSIP_SIGNAL_HPP_
#define SSIP_SIGNAL_HPP_

#include <vector>

namespace ssip {

/// A mono audio signal. Samples are full-scale normalized (nominally in
/// [-1, 1]; values outside that range are legal after gain changes, this is a
/// feature-extraction input and never clipped).
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0
               ? static_cast<double>(samples.size()) / sample_rate
               : 0.0;
  }
};

/// Digital audio carries no absolute sound pressure level; this declares one.
/// A waveform whose RMS amplitude equals 1.0 is assigned
/// `spl_at_full_scale_rms` dB SPL. Only relative levels matter downstream,
/// so the default of 100 dB is a documented convention, not a measurement.
struct LevelReference {
  double spl_at_full_scale_rms = 100.0;
};

/// Linear RMS amplitude of the samples.
/// Throws DegenerateSignal on an empty or all-zero waveform.
double rms_linear(const Waveform& w);

/// RMS level in dB SPL under the given reference:
/// ref.spl_at_full_scale_rms + 20*log10(RMS(samples)).
double rms_level_db(const Waveform& w, const LevelReference& ref = {});

/// Scales the waveform so that rms_level_db(result, ref) == target_db_spl.
/// Sample count, sample rate and zero-crossing pattern are preserved.
Waveform normalize_to_spl(const Waveform& w, double target_db_spl,
                          const LevelReference& ref = {});

}  // namespace ssip

#endif  // SSIP_SIGNAL_HPP_
