// include/ssip/backbone.hpp

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

#ifndef SSIP_BACKBONE_HPP_
#define SSIP_BACKBONE_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ssip/nn/matrix.hpp"
#include "ssip/rng.hpp"
#include "ssip/signal.hpp"

namespace ssip {

/// Per-layer encoder features for one audio clip: layer_count matrices of
/// shape (t x channel_dim), all sharing t.
struct BackboneOutput {
  std::vector<nn::Matrix> layer_features;

  int layer_count() const { return static_cast<int>(layer_features.size()); }
  int frames() const {
    return layer_features.empty() ? 0 : layer_features.front().rows;
  }
  int channel_dim() const {
    return layer_features.empty() ? 0 : layer_features.front().cols;
  }
};

/// A frozen feature extractor. Implementations never update weights; given
/// fixed construction arguments the output is a pure function of the input.
class BackboneExtractor {
 public:
  virtual ~BackboneExtractor() = default;

  /// Features from all encoder layers. `cache_key` identifies the clip
  /// (normally the sample_id) for implementations that look features up
  /// rather than compute them; computing implementations ignore it.
  virtual BackboneOutput extract(const Waveform& w,
                                 const std::string& cache_key = "") const = 0;

  virtual int layer_count() const = 0;
  virtual int channel_dim() const = 0;

  /// Fingerprint of the frozen weights; tests assert it never changes.
  virtual std::uint64_t weight_checksum() const = 0;
};

struct ToyBackboneConfig {
  int layers = 4;
  int channels = 16;
  int frame_size = 256;
  int hop = 128;
  std::uint64_t seed = 0x7051u;
};

/// Deterministic seeded random convolutional stack for tests and desk-scale
/// experiments. Layer 0 projects raw frames through a fixed random matrix;
/// each further layer is a width-3 temporal convolution. All layers use a
/// tanh nonlinearity with fixed random biases (the biases keep time-averaged
/// features from vanishing on symmetric signals).
class ToyBackbone : public BackboneExtractor {
 public:
  explicit ToyBackbone(const ToyBackboneConfig& cfg = {});

  BackboneOutput extract(const Waveform& w,
                         const std::string& cache_key = "") const override;
  int layer_count() const override { return cfg_.layers; }
  int channel_dim() const override { return cfg_.channels; }
  std::uint64_t weight_checksum() const override;

 private:
  ToyBackboneConfig cfg_;
  nn::Matrix frame_proj_;               // (frame_size x channels)
  nn::Matrix frame_bias_;               // (1 x channels)
  std::vector<nn::Matrix> conv_taps_;   // per layer: (3*channels x channels)
  std::vector<nn::Matrix> conv_bias_;   // per layer: (1 x channels)
};

/// Adapter for an external pretrained speech foundation model. Large
/// backbones run outside this toolkit; their per-layer encoder outputs are
/// dumped once into a cache directory (one `<cache_key>.ssft` file per clip,
/// see read/write_feature_file) and this class serves them. Throws
/// BackboneError when a clip has no cached features.
class FeatureCacheBackbone : public BackboneExtractor {
 public:
  FeatureCacheBackbone(std::string cache_dir, int layers, int channel_dim);

  BackboneOutput extract(const Waveform& w,
                         const std::string& cache_key) const override;
  int layer_count() const override { return layers_; }
  int channel_dim() const override { return channel_dim_; }
  std::uint64_t weight_checksum() const override;

 private:
  std::string cache_dir_;
  int layers_;
  int channel_dim_;
};

/// Binary feature container: "SSFT1\n", three little-endian u32 (layers,
/// frames, channels), then float32 values layer-major, row-major per layer.
BackboneOutput read_feature_file(const std::string& path);
void write_feature_file(const std::string& path, const BackboneOutput& bo);

}  // namespace ssip

#endif  // SSIP_BACKBONE_HPP_
