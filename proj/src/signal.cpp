// src/signal.cpp

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

#include "ssip/signal.hpp"

#include <cmath>

#include "ssip/errors.hpp"

namespace ssip {

double rms_linear(const Waveform& w) {
  if (w.samples.empty()) {
    throw DegenerateSignal("rms of an empty waveform");
  }
  double sum_sq = 0.0;
  for (double s : w.samples) {
    sum_sq += s * s;
  }
  if (sum_sq == 0.0) {
    throw DegenerateSignal("rms of an all-zero waveform");
  }
  return std::sqrt(sum_sq / static_cast<double>(w.samples.size()));
}

double rms_level_db(const Waveform& w, const LevelReference& ref) {
  return ref.spl_at_full_scale_rms + 20.0 * std::log10(rms_linear(w));
}

Waveform normalize_to_spl(const Waveform& w, double target_db_spl,
                          const LevelReference& ref) {
  const double gain =
      std::pow(10.0, (target_db_spl - rms_level_db(w, ref)) / 20.0);
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    out.samples[i] = w.samples[i] * gain;
  }
  return out;
}

}  // namespace ssip
