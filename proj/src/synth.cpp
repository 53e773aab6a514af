// src/synth.cpp

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

#include "ssip/synth.hpp"

#include <cmath>
#include <filesystem>

#include "ssip/errors.hpp"
#include "ssip/signal.hpp"
#include "ssip/wav_io.hpp"

namespace ssip {

namespace fs = std::filesystem;

namespace {

std::string padded(int value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

SynthDataset generate_synth_dataset(const SynthConfig& cfg) {
  if (cfg.n_listeners < 1 || cfg.samples_per_listener < 1) {
    throw RangeError("synth dataset needs positive counts");
  }
  SeededRng rng(cfg.seed);
  SynthDataset ds;
  const int n_samples = static_cast<int>(
      cfg.sample_rate * cfg.duration_seconds);

  for (int li = 0; li < cfg.n_listeners; ++li) {
    const std::string listener_id = "L" + padded(li + 1, 3);
    const double slope = rng.uniform(cfg.slope_min, cfg.slope_max);
    const double offset = rng.uniform(cfg.offset_min, cfg.offset_max);

    // Audiogram: hearing loss grows with listener index, with a gentle
    // high-frequency slope and per-frequency jitter.
    const double base_hl =
        5.0 + 65.0 * (cfg.n_listeners > 1
                          ? static_cast<double>(li) / (cfg.n_listeners - 1)
                          : 0.0);
    Audiogram audiogram;
    int freq_rank = 0;
    for (int f : {250, 500, 1000, 2000, 3000, 4000, 6000, 8000}) {
      const double hl = base_hl + 2.0 * freq_rank + rng.uniform(-3.0, 3.0);
      audiogram.thresholds[f] = std::clamp(hl, 0.0, 110.0);
      ++freq_rank;
    }
    // Presentation level metadata correlating with hearing loss (systems
    // amplify more for worse hearing).
    const double listener_level = 60.0 + 0.35 * base_hl;

    for (int si = 0; si < cfg.samples_per_listener; ++si) {
      const double statistic = rng.uniform();
      const double phase_low = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      const double phase_high = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      const double amp_low = std::sqrt(1.0 - statistic);
      const double amp_high = std::sqrt(statistic);

      Waveform w;
      w.sample_rate = cfg.sample_rate;
      w.samples.resize(n_samples);
      for (int i = 0; i < n_samples; ++i) {
        const double tsec = static_cast<double>(i) / cfg.sample_rate;
        w.samples[i] =
            amp_low * std::sin(2.0 * 3.14159265358979323846 *
                                   cfg.low_tone_hz * tsec +
                               phase_low) +
            amp_high * std::sin(2.0 * 3.14159265358979323846 *
                                    cfg.high_tone_hz * tsec +
                                phase_high) +
            0.05 * rng.normal();
      }
      // Fixed presentation level for every clip (the decorrelation story:
      // levels are equalized, scores already calibrated).
      const double current_rms = rms_linear(w);
      const double gain = cfg.target_rms / current_rms;
      for (auto& smp : w.samples) smp *= gain;

      Sample s;
      s.sample_id = listener_id + "_S" + padded(si + 1, 4);
      s.listener_id = listener_id;
      s.system_id = "SYN" + padded(1 + (si % 3), 2);
      s.audio_path = "audio/" + s.sample_id + ".wav";
      s.score = Score(slope * statistic + offset);
      s.audiogram = audiogram;
      s.original_level_db_spl = listener_level + rng.uniform(-1.5, 1.5);
      ds.waveforms[s.sample_id] = std::move(w);
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

void write_synth_dataset(const SynthConfig& cfg, const std::string& out_dir) {
  SynthDataset ds = generate_synth_dataset(cfg);
  fs::create_directories(fs::path(out_dir) / "audio");
  fs::create_directories(fs::path(out_dir) / "folds");
  for (const auto& [sample_id, w] : ds.waveforms) {
    save_waveform((fs::path(out_dir) / "audio" / (sample_id + ".wav")).string(),
                  w, WavEncoding::float32);
  }
  save_manifest((fs::path(out_dir) / "manifest.jsonl").string(), ds.samples);
  const std::vector<SplitSpec> folds = make_fold_specs(ds.samples);
  for (const SplitSpec& fold : folds) {
    save_split((fs::path(out_dir) / "folds" /
                ("fold" + std::to_string(fold.fold_index) + ".json"))
                   .string(),
               fold);
  }
}

void inject_waveforms(const SynthDataset& ds, FeatureStore& store) {
  for (const auto& [sample_id, w] : ds.waveforms) {
    store.put_waveform(sample_id, w);
  }
}

void resolve_audio_paths(std::vector<Sample>& samples,
                         const std::string& manifest_path) {
  const fs::path base = fs::path(manifest_path).parent_path();
  for (Sample& s : samples) {
    if (!s.audio_path.empty() && fs::path(s.audio_path).is_relative()) {
      s.audio_path = (base / s.audio_path).string();
    }
  }
}

}  // namespace ssip
