// include/ssip/model.hpp

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

#ifndef SSIP_MODEL_HPP_
#define SSIP_MODEL_HPP_

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssip/backbone.hpp"
#include "ssip/dataset.hpp"
#include "ssip/fem.hpp"
#include "ssip/spm.hpp"

namespace ssip {

struct BackboneConfig {
  enum class Kind { toy, foundation };

  Kind kind = Kind::toy;
  ToyBackboneConfig toy;
  // Foundation backbones run externally; their per-layer features are read
  // from a cache directory (see FeatureCacheBackbone).
  std::string feature_cache_dir;
  int foundation_layers = 32;
  int foundation_channels = 1280;

  int layers() const {
    return kind == Kind::toy ? toy.layers : foundation_layers;
  }
  int channels() const {
    return kind == Kind::toy ? toy.channels : foundation_channels;
  }
};

std::shared_ptr<BackboneExtractor> make_backbone(const BackboneConfig& cfg);

enum class PredictionMode { ssip, audiogram_baseline };

struct ModelConfig {
  PredictionMode mode = PredictionMode::ssip;
  FemConfig fem;
  // Which audiogram thresholds feed the condition projection in baseline
  // mode, in order. Must match fem.audiogram_dim.
  std::vector<int> audiogram_frequencies = {250,  500,  1000, 2000,
                                            3000, 4000, 6000, 8000};
  BackboneConfig backbone;
  std::uint64_t init_seed = 1;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

/// Loads audio, runs the frozen backbone and memoizes the result per
/// sample_id (legal because the backbone never changes). Tests can inject
/// waveforms directly instead of going through files.
class FeatureStore {
 public:
  explicit FeatureStore(std::shared_ptr<const BackboneExtractor> backbone)
      : backbone_(std::move(backbone)) {}

  const BackboneOutput& features(const Sample& s);
  void put_waveform(const std::string& sample_id, Waveform w) {
    waveform_overrides_[sample_id] = std::move(w);
  }
  void clear() { cache_.clear(); }
  const BackboneExtractor& backbone() const { return *backbone_; }

 private:
  std::shared_ptr<const BackboneExtractor> backbone_;
  std::map<std::string, Waveform> waveform_overrides_;
  std::map<std::string, BackboneOutput> cache_;
};

/// The full network: feature encoder plus prediction head. In `ssip` mode
/// the head consumes [support aggregate ; query embedding]; in
/// `audiogram_baseline` mode a separate head consumes the query embedding
/// alone and conditions carry the audiogram instead of a score.
class SsipNet {
 public:
  explicit SsipNet(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  FeatureEncoder& fem() { return fem_; }
  const std::shared_ptr<BackboneExtractor>& backbone() const {
    return backbone_;
  }
  int embed_dim() const { return cfg_.fem.embed_dim; }

  /// Effective head weights on the 0-100 output scale, for the spm-level
  /// predict_query path. Internally the head regresses score/100 and a
  /// fixed x100 output scale is folded in (keeps every trainable parameter
  /// O(1), which the adaptive optimizer needs); the product of the two is
  /// still one linear map of the concatenation.
  nn::Matrix head_weight() const;
  nn::Matrix head_bias() const;

  /// Fixed output scale between the internal regression target (score/100)
  /// and reported scores.
  static constexpr double kOutputScale = 100.0;

  ConditionInput support_condition(const Sample& s) const;
  ConditionInput query_condition(const Sample& s) const;

  Embedding embed_sample(const Sample& s, const ConditionInput& c,
                         FeatureStore& store);

  /// Inference over one episode. One support aggregate (canonical
  /// summation order) shared by all queries; one Prediction per query, in
  /// query order. Query targets never enter.
  std::vector<Prediction> forward_batch(const ListenerBatch& b,
                                        FeatureStore& store);

  struct BatchLoss {
    nn::Var loss;             // scalar, on the score/100 scale
    nn::Var predictions;      // (n_queries x 1), 0-100 scale, unclamped
  };

  /// Training forward pass on an existing tape. All query targets must be
  /// known. dropout_rng is required when training with nonzero dropout.
  BatchLoss batch_loss(nn::Tape& t, nn::Binder& bind, const ListenerBatch& b,
                       FeatureStore& store, double huber_delta,
                       bool training = true,
                       SeededRng* dropout_rng = nullptr);

  /// Parameters the optimizer sees under the configured mode.
  std::vector<nn::Param*> trainable_parameters();
  /// Every parameter, canonical order (checkpointing, checksums).
  std::vector<nn::Param*> all_parameters();

  std::uint64_t parameter_checksum();
  std::vector<nn::Matrix> parameter_snapshot();
  void restore_parameters(const std::vector<nn::Matrix>& snapshot);

 private:
  ModelConfig cfg_;
  std::shared_ptr<BackboneExtractor> backbone_;
  FeatureEncoder fem_;
  nn::LinearLayer head_;           // (2*d2 -> 1), ssip mode
  nn::LinearLayer baseline_head_;  // (d2 -> 1), audiogram-baseline mode
};

struct CheckpointMeta {
  int epoch = 0;
  double val_rmse = 0.0;
  std::optional<double> val_ncc;
  int n_support = 0;
  std::uint64_t seed = 0;
  std::set<std::string> train_listeners;
  std::set<std::string> val_listeners;
  std::string manifest_hash;
  std::string curves_hash;
};

/// Versioned checkpoint container: a JSON header (model config, metadata,
/// parameter table) followed by raw float64 parameter data.
void save_checkpoint(const std::string& path, SsipNet& model,
                     const CheckpointMeta& meta);

struct LoadedCheckpoint {
  SsipNet model;
  CheckpointMeta meta;
};

/// Rebuilds the model from the stored config and parameter values.
/// `feature_cache_override`, when non-empty, replaces the stored foundation
/// feature directory (checkpoints move between machines).
LoadedCheckpoint load_checkpoint(const std::string& path,
                                 const std::string& feature_cache_override = "");

}  // namespace ssip

#endif  // SSIP_MODEL_HPP_
