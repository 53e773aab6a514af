// src/backbone.cpp

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

#include "ssip/backbone.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "ssip/errors.hpp"
#include "ssip/hash.hpp"

namespace ssip {

ToyBackbone::ToyBackbone(const ToyBackboneConfig& cfg) : cfg_(cfg) {
  if (cfg.layers < 1 || cfg.channels < 1 || cfg.frame_size < 1 || cfg.hop < 1) {
    throw RangeError("toy backbone configuration values must be positive");
  }
  SeededRng rng(cfg.seed);
  const double proj_scale = 1.0 / std::sqrt(static_cast<double>(cfg.frame_size));
  frame_proj_ = nn::Matrix(cfg.frame_size, cfg.channels);
  for (auto& v : frame_proj_.data) v = rng.normal(0.0, proj_scale);
  frame_bias_ = nn::Matrix(1, cfg.channels);
  for (auto& v : frame_bias_.data) v = rng.normal(0.0, 0.5);

  const double tap_scale = 1.0 / std::sqrt(3.0 * cfg.channels);
  for (int l = 1; l < cfg.layers; ++l) {
    nn::Matrix taps(3 * cfg.channels, cfg.channels);
    for (auto& v : taps.data) v = rng.normal(0.0, tap_scale);
    conv_taps_.push_back(std::move(taps));
    nn::Matrix bias(1, cfg.channels);
    for (auto& v : bias.data) v = rng.normal(0.0, 0.5);
    conv_bias_.push_back(std::move(bias));
  }
}

BackboneOutput ToyBackbone::extract(const Waveform& w,
                                    const std::string&) const {
  const int n = static_cast<int>(w.samples.size());
  if (n < cfg_.frame_size) {
    throw DegenerateSignal("audio too short for one frame: " +
                           std::to_string(n) + " samples, frame size " +
                           std::to_string(cfg_.frame_size));
  }
  const int t = 1 + (n - cfg_.frame_size) / cfg_.hop;
  const int c = cfg_.channels;

  BackboneOutput out;
  out.layer_features.reserve(cfg_.layers);

  // Layer 0: random projection of raw frames (a gain lifts typical speech
  // amplitudes into tanh's responsive range).
  nn::Matrix layer(t, c);
  for (int i = 0; i < t; ++i) {
    const double* frame = w.samples.data() + static_cast<std::size_t>(i) * cfg_.hop;
    for (int j = 0; j < c; ++j) {
      double acc = frame_bias_.at(0, j);
      for (int k = 0; k < cfg_.frame_size; ++k) {
        acc += 8.0 * frame[k] * frame_proj_.at(k, j);
      }
      layer.at(i, j) = std::tanh(acc);
    }
  }
  out.layer_features.push_back(layer);

  // Deeper layers: width-3 temporal convolution with edge clamping.
  for (int l = 1; l < cfg_.layers; ++l) {
    const nn::Matrix& prev = out.layer_features.back();
    const nn::Matrix& taps = conv_taps_[l - 1];
    const nn::Matrix& bias = conv_bias_[l - 1];
    nn::Matrix next(t, c);
    for (int i = 0; i < t; ++i) {
      const int i_prev = std::max(i - 1, 0);
      const int i_next = std::min(i + 1, t - 1);
      for (int j = 0; j < c; ++j) {
        double acc = bias.at(0, j);
        for (int k = 0; k < c; ++k) {
          acc += prev.at(i_prev, k) * taps.at(k, j);
          acc += prev.at(i, k) * taps.at(c + k, j);
          acc += prev.at(i_next, k) * taps.at(2 * c + k, j);
        }
        next.at(i, j) = std::tanh(acc);
      }
    }
    out.layer_features.push_back(std::move(next));
  }
  return out;
}

std::uint64_t ToyBackbone::weight_checksum() const {
  std::uint64_t h = fnv1a64(frame_proj_.data.data(),
                            frame_proj_.data.size() * sizeof(double));
  h = fnv1a64(frame_bias_.data.data(),
              frame_bias_.data.size() * sizeof(double), h);
  for (const auto& m : conv_taps_) {
    h = fnv1a64(m.data.data(), m.data.size() * sizeof(double), h);
  }
  for (const auto& m : conv_bias_) {
    h = fnv1a64(m.data.data(), m.data.size() * sizeof(double), h);
  }
  return h;
}

FeatureCacheBackbone::FeatureCacheBackbone(std::string cache_dir, int layers,
                                           int channel_dim)
    : cache_dir_(std::move(cache_dir)),
      layers_(layers),
      channel_dim_(channel_dim) {
  if (layers_ < 1 || channel_dim_ < 1) {
    throw RangeError("feature cache backbone needs positive dimensions");
  }
}

BackboneOutput FeatureCacheBackbone::extract(const Waveform&,
                                             const std::string& cache_key) const {
  if (cache_key.empty()) {
    throw BackboneError("feature cache lookup needs a cache key");
  }
  const std::string path = cache_dir_ + "/" + cache_key + ".ssft";
  BackboneOutput bo;
  try {
    bo = read_feature_file(path);
  } catch (const IoError&) {
    throw BackboneError("no cached features for '" + cache_key + "' under " +
                        cache_dir_);
  }
  if (bo.layer_count() != layers_ || bo.channel_dim() != channel_dim_) {
    throw BackboneError("cached features for '" + cache_key + "' are " +
                        std::to_string(bo.layer_count()) + "x" +
                        std::to_string(bo.channel_dim()) + ", expected " +
                        std::to_string(layers_) + "x" +
                        std::to_string(channel_dim_));
  }
  return bo;
}

std::uint64_t FeatureCacheBackbone::weight_checksum() const {
  // The external model is identified by its cache directory contents; the
  // directory name stands in for a weight fingerprint.
  return fnv1a64(cache_dir_);
}

BackboneOutput read_feature_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open feature file: " + path);
  }
  char magic[6];
  if (!in.read(magic, 6) || std::memcmp(magic, "SSFT1\n", 6) != 0) {
    throw FormatError("bad feature file magic in " + path);
  }
  std::uint32_t dims[3];
  if (!in.read(reinterpret_cast<char*>(dims), sizeof dims)) {
    throw FormatError("truncated feature file header in " + path);
  }
  const std::uint32_t layers = dims[0], frames = dims[1], channels = dims[2];
  if (layers == 0 || frames == 0 || channels == 0 ||
      layers > 1024 || channels > 65536) {
    throw FormatError("implausible feature dimensions in " + path);
  }
  BackboneOutput bo;
  std::vector<float> buf(static_cast<std::size_t>(frames) * channels);
  for (std::uint32_t l = 0; l < layers; ++l) {
    if (!in.read(reinterpret_cast<char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size() * sizeof(float)))) {
      throw FormatError("truncated feature data in " + path);
    }
    nn::Matrix m(static_cast<int>(frames), static_cast<int>(channels));
    for (std::size_t i = 0; i < buf.size(); ++i) {
      m.data[i] = static_cast<double>(buf[i]);
    }
    bo.layer_features.push_back(std::move(m));
  }
  return bo;
}

void write_feature_file(const std::string& path, const BackboneOutput& bo) {
  if (bo.layer_count() == 0 || bo.frames() == 0) {
    throw EmptyInput("refusing to write an empty feature file");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out.write("SSFT1\n", 6);
  const std::uint32_t dims[3] = {static_cast<std::uint32_t>(bo.layer_count()),
                                 static_cast<std::uint32_t>(bo.frames()),
                                 static_cast<std::uint32_t>(bo.channel_dim())};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  std::vector<float> buf;
  for (const auto& m : bo.layer_features) {
    buf.resize(m.data.size());
    for (std::size_t i = 0; i < m.data.size(); ++i) {
      buf[i] = static_cast<float>(m.data[i]);
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) {
    throw IoError("short write to " + path);
  }
}

}  // namespace ssip
