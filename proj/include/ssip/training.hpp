// include/ssip/training.hpp

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

#ifndef SSIP_TRAINING_HPP_
#define SSIP_TRAINING_HPP_

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ssip/metrics.hpp"
#include "ssip/model.hpp"

namespace ssip {

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 3e-5;
  double beta1 = 0.9;
  double beta2 = 0.98;
  int warmup_epochs = 10;
  double warmup_start_factor = 0.1;
  int batch_size = 128;
  int n_support = 64;
  double huber_delta = 1.0;  // on the score/100 loss scale
  std::uint64_t seed = 1;
  double grad_clip_norm = 1.0;  // <= 0 disables clipping
  ModelConfig model;
  // Provenance recorded into checkpoints; not used for computation.
  std::string manifest_hash;
  std::string curves_hash;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  static TrainConfig load(const std::string& path);
};

/// Scalar Huber loss, 0.5 e^2 for |e| <= delta, delta(|e| - delta/2) beyond.
/// Throws RangeError on a non-positive delta.
double huber_loss(double pred, double target, double delta);

/// Scheduler value for an epoch: linear warmup from
/// warmup_start_factor * lr to lr over warmup_epochs, then cosine annealing
/// to zero over the remaining epochs. Throws RangeError outside
/// [0, epochs).
double lr_at(int epoch, const TrainConfig& cfg);

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;
  double val_rmse = 0.0;
  std::optional<double> val_ncc;
};

struct TrainResult {
  SsipNet model;  // parameters restored to the best validation epoch
  CheckpointMeta meta;
  std::vector<EpochLog> log;
};

/// Episode-based training. Per step: draw a training listener uniformly,
/// sample a support/query episode, forward, Huber loss over queries, Adam
/// step (audiogram-baseline mode instead draws plain batches across
/// listeners). After each epoch the model is scored on fixed validation
/// episodes; the parameters with the best validation RMSE are returned.
/// Fully deterministic under cfg.seed. Throws InsufficientSamples when no
/// listener can form an episode and DivergenceError on a non-finite loss.
/// When `log_stream` is non-null, one JSON line is emitted per epoch.
TrainResult train(const TrainConfig& cfg, const std::vector<Sample>& train_samples,
                  const std::vector<Sample>& val_samples, FeatureStore& store,
                  std::ostream* log_stream = nullptr);

/// Fixed-episode evaluation of a trained model over the test samples:
/// one fixed episode per listener (seed-keyed support selection, all
/// remaining samples as queries), metrics pooled across listeners on
/// clamped reported scores. `train_listeners` is the checkpoint's training
/// set; any overlap with the test listeners raises LeakageError.
MetricsReport evaluate(SsipNet& model,
                       const std::set<std::string>& train_listeners,
                       const std::vector<Sample>& test_samples, int n_support,
                       std::uint64_t seed, FeatureStore& store,
                       int fold_index = 0);

/// The evaluation core without the leakage guard (validation reuses it).
MetricsReport evaluate_fixed_episodes(SsipNet& model,
                                      const std::vector<Sample>& samples,
                                      int n_support, std::uint64_t seed,
                                      FeatureStore& store, int fold_index = 0);

/// Predictions for every query of every listener's fixed episode, in a
/// stable order; used by the `predict` command and the prediction file
/// writer.
struct EpisodePredictions {
  std::vector<Prediction> predictions;
  std::vector<Score> targets;  // unknown sentinel when truth is absent
  int n_support = 0;
};
EpisodePredictions predict_fixed_episodes(SsipNet& model,
                                          const std::vector<Sample>& samples,
                                          int n_support, std::uint64_t seed,
                                          FeatureStore& store);

/// Metrics over already-computed episode predictions (clamped reported
/// scores, pooled plus per-listener). Every target must be known.
MetricsReport metrics_from_predictions(const EpisodePredictions& ep,
                                       int fold_index = 0);

/// The leakage guard on its own. Throws LeakageError when any sample's
/// listener appears in `train_listeners`.
void verify_no_listener_overlap(const std::set<std::string>& train_listeners,
                                const std::vector<Sample>& samples);

/// Line-record prediction file: sample_id, listener_id, n_support,
/// predicted score, ground truth (empty when unknown).
void save_predictions(const std::string& path, const EpisodePredictions& ep);

}  // namespace ssip

#endif  // SSIP_TRAINING_HPP_
