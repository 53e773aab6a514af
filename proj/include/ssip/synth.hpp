// include/ssip/synth.hpp

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

#ifndef SSIP_SYNTH_HPP_
#define SSIP_SYNTH_HPP_

#include <map>
#include <string>
#include <vector>

#include "ssip/dataset.hpp"
#include "ssip/model.hpp"

namespace ssip {

/// Deterministic synthetic dataset for tests and desk-scale experiments.
/// Each clip mixes a low and a high tone at fixed RMS (plus a little
/// noise); the audio-derived statistic s in [0, 1] is the high tone's
/// energy share. Each listener's score is a fixed listener-specific affine
/// function of s:
///
///   score = slope_l * s + offset_l
///
/// Slopes and offsets are drawn per listener from the configured ranges,
/// chosen so that no score leaves [0, 100]. Audiograms rise with listener
/// index and the level metadata correlates with hearing loss, which gives
/// the analysis command something to find.
struct SynthConfig {
  int n_listeners = 31;
  int samples_per_listener = 50;
  std::uint64_t seed = 2026;
  int sample_rate = 16000;
  double duration_seconds = 0.25;
  double low_tone_hz = 400.0;
  double high_tone_hz = 1600.0;
  double slope_min = 20.0;
  double slope_max = 60.0;
  double offset_min = 15.0;
  double offset_max = 38.0;
  double target_rms = 0.1;  // linear amplitude, i.e. 80 dB SPL at the default reference
};

struct SynthDataset {
  std::vector<Sample> samples;                 // audio_path = "audio/<id>.wav"
  std::map<std::string, Waveform> waveforms;   // keyed by sample_id
};

SynthDataset generate_synth_dataset(const SynthConfig& cfg);

/// Writes <out_dir>/audio/*.wav, <out_dir>/manifest.jsonl and
/// <out_dir>/folds/fold{1,2,3}.json. Byte-stable for a fixed config, so
/// re-running changes nothing.
void write_synth_dataset(const SynthConfig& cfg, const std::string& out_dir);

/// Registers the in-memory waveforms with a FeatureStore so tests can skip
/// the filesystem.
void inject_waveforms(const SynthDataset& ds, FeatureStore& store);

/// Prefixes relative audio paths with the directory the manifest lives in.
void resolve_audio_paths(std::vector<Sample>& samples,
                         const std::string& manifest_path);

}  // namespace ssip

#endif  // SSIP_SYNTH_HPP_
