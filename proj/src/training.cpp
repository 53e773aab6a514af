// src/training.cpp

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

#include "ssip/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "ssip/errors.hpp"
#include "ssip/nn/adam.hpp"

namespace ssip {

using nlohmann::json;

void TrainConfig::validate() const {
  if (epochs < 1) throw RangeError("epochs must be >= 1");
  if (learning_rate <= 0.0) throw RangeError("learning_rate must be positive");
  if (warmup_epochs < 0 || warmup_epochs > epochs) {
    throw RangeError("need 0 <= warmup_epochs <= epochs");
  }
  if (batch_size < 2) throw RangeError("batch_size must be >= 2");
  if (model.mode == PredictionMode::ssip &&
      (n_support < 1 || n_support >= batch_size)) {
    throw RangeError("need 1 <= n_support < batch_size");
  }
  if (huber_delta <= 0.0) throw RangeError("huber_delta must be positive");
}

json TrainConfig::to_json() const {
  json j;
  j["epochs"] = epochs;
  j["learning_rate"] = learning_rate;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["warmup_epochs"] = warmup_epochs;
  j["warmup_start_factor"] = warmup_start_factor;
  j["batch_size"] = batch_size;
  j["n_support"] = n_support;
  j["huber_delta"] = huber_delta;
  j["seed"] = seed;
  j["grad_clip_norm"] = grad_clip_norm;
  j["model"] = model.to_json();
  return j;
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig cfg;
  try {
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.beta1 = j.value("beta1", cfg.beta1);
    cfg.beta2 = j.value("beta2", cfg.beta2);
    cfg.warmup_epochs = j.value("warmup_epochs", cfg.warmup_epochs);
    cfg.warmup_start_factor =
        j.value("warmup_start_factor", cfg.warmup_start_factor);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.n_support = j.value("n_support", cfg.n_support);
    cfg.huber_delta = j.value("huber_delta", cfg.huber_delta);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.grad_clip_norm = j.value("grad_clip_norm", cfg.grad_clip_norm);
    if (j.contains("model")) {
      cfg.model = ModelConfig::from_json(j.at("model"));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("train config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

TrainConfig TrainConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open train config: " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return from_json(j);
}

double huber_loss(double pred, double target, double delta) {
  if (delta <= 0.0) {
    throw RangeError("huber delta must be positive");
  }
  return nn::huber(pred - target, delta);
}

double lr_at(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs) {
    throw RangeError("epoch " + std::to_string(epoch) +
                     " outside [0, " + std::to_string(cfg.epochs) + ")");
  }
  const double lr = cfg.learning_rate;
  if (epoch < cfg.warmup_epochs) {
    const double f = cfg.warmup_start_factor +
                     (1.0 - cfg.warmup_start_factor) *
                         (static_cast<double>(epoch) / cfg.warmup_epochs);
    return lr * f;
  }
  const int cosine_span = cfg.epochs - cfg.warmup_epochs;
  if (cosine_span == 0) {
    return lr;
  }
  const double progress =
      static_cast<double>(epoch - cfg.warmup_epochs) / cosine_span;
  return lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
}

namespace {

/// All of one listener's samples become queries; baseline training uses
/// cross-listener batches that never look at support pairs.
ListenerBatch plain_query_batch(const std::vector<const Sample*>& samples) {
  ListenerBatch b;
  b.listener_id = samples.front()->listener_id;
  for (const Sample* s : samples) {
    b.queries.push_back(*s);
    b.query_targets.push_back(s->score);
  }
  return b;
}

}  // namespace

MetricsReport metrics_from_predictions(const EpisodePredictions& ep,
                                       int fold_index) {
  if (ep.predictions.empty()) {
    throw EmptyInput("no predictions to score");
  }
  std::vector<double> pooled_pred, pooled_truth;
  std::map<std::string, std::vector<double>> by_listener_pred,
      by_listener_truth;
  for (std::size_t i = 0; i < ep.predictions.size(); ++i) {
    const Prediction& p = ep.predictions[i];
    const double truth = ep.targets[i].known_value();
    pooled_pred.push_back(p.reported_score);
    pooled_truth.push_back(truth);
    by_listener_pred[p.listener_id].push_back(p.reported_score);
    by_listener_truth[p.listener_id].push_back(truth);
  }
  MetricsReport report;
  report.rmse = rmse(pooled_pred, pooled_truth);
  report.ncc = pooled_pred.size() >= 2 ? ncc(pooled_pred, pooled_truth)
                                       : std::nullopt;
  report.n_queries = static_cast<int>(pooled_pred.size());
  report.n_support = ep.n_support;
  report.clamped = true;
  report.fold_index = fold_index;
  for (const auto& [listener, preds] : by_listener_pred) {
    const auto& truths = by_listener_truth.at(listener);
    PerListenerMetrics m;
    m.rmse = rmse(preds, truths);
    m.ncc = preds.size() >= 2 ? ncc(preds, truths) : std::nullopt;
    m.n_queries = static_cast<int>(preds.size());
    report.per_listener[listener] = m;
  }
  return report;
}

void verify_no_listener_overlap(const std::set<std::string>& train_listeners,
                                const std::vector<Sample>& samples) {
  for (const Sample& s : samples) {
    if (train_listeners.count(s.listener_id)) {
      throw LeakageError("listener '" + s.listener_id +
                         "' appears in both the training set and the test set");
    }
  }
}

MetricsReport evaluate_fixed_episodes(SsipNet& model,
                                      const std::vector<Sample>& samples,
                                      int n_support, std::uint64_t seed,
                                      FeatureStore& store, int fold_index) {
  if (samples.empty()) {
    throw EmptyInput("no samples to evaluate");
  }
  return metrics_from_predictions(
      predict_fixed_episodes(model, samples, n_support, seed, store),
      fold_index);
}

MetricsReport evaluate(SsipNet& model,
                       const std::set<std::string>& train_listeners,
                       const std::vector<Sample>& test_samples, int n_support,
                       std::uint64_t seed, FeatureStore& store,
                       int fold_index) {
  verify_no_listener_overlap(train_listeners, test_samples);
  return evaluate_fixed_episodes(model, test_samples, n_support, seed, store,
                                 fold_index);
}

EpisodePredictions predict_fixed_episodes(SsipNet& model,
                                          const std::vector<Sample>& samples,
                                          int n_support, std::uint64_t seed,
                                          FeatureStore& store) {
  EpisodePredictions out;
  out.n_support = n_support;
  for (const auto& [listener, pool] : group_by_listener(samples)) {
    ListenerBatch episode = fixed_eval_episode(pool, n_support, seed);
    std::vector<Prediction> preds = model.forward_batch(episode, store);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      out.predictions.push_back(preds[i]);
      out.targets.push_back(episode.query_targets[i]);
    }
  }
  return out;
}

void save_predictions(const std::string& path, const EpisodePredictions& ep) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  for (std::size_t i = 0; i < ep.predictions.size(); ++i) {
    const Prediction& p = ep.predictions[i];
    json j;
    j["sample_id"] = p.sample_id;
    j["listener_id"] = p.listener_id;
    j["n_support"] = ep.n_support;
    j["predicted_score"] = p.reported_score;
    if (ep.targets[i].is_known()) {
      j["score"] = ep.targets[i].value;
    }
    out << j.dump() << "\n";
  }
}

TrainResult train(const TrainConfig& cfg,
                  const std::vector<Sample>& train_samples,
                  const std::vector<Sample>& val_samples, FeatureStore& store,
                  std::ostream* log_stream) {
  cfg.validate();
  if (train_samples.empty()) {
    throw InsufficientSamples("empty training set");
  }
  if (val_samples.empty()) {
    throw InsufficientSamples("empty validation set (checkpoint selection "
                              "needs validation episodes)");
  }
  const bool baseline = cfg.model.mode == PredictionMode::audiogram_baseline;

  ModelConfig model_cfg = cfg.model;
  if (model_cfg.init_seed == 0) {
    model_cfg.init_seed = cfg.seed;  // 0 means "derive from the train seed"
  }
  SsipNet model(model_cfg);
  const std::uint64_t backbone_checksum_before =
      model.backbone()->weight_checksum();

  // Listener pools for episode sampling. A listener whose pool is smaller
  // than the batch yields a reduced query count (support count stays exact);
  // a listener who cannot even fill the support set is not drawable.
  auto by_listener = group_by_listener(train_samples);
  std::vector<const std::vector<Sample>*> drawable;
  for (const auto& [listener, pool] : by_listener) {
    if (static_cast<int>(pool.size()) > cfg.n_support) {
      drawable.push_back(&pool);
    }
  }
  if (!baseline && drawable.empty()) {
    throw InsufficientSamples(
        "no training listener has more than n_support samples");
  }

  std::vector<const Sample*> flat;
  for (const Sample& s : train_samples) flat.push_back(&s);

  SeededRng rng(cfg.seed);
  nn::AdamConfig adam_cfg;
  adam_cfg.beta1 = cfg.beta1;
  adam_cfg.beta2 = cfg.beta2;
  adam_cfg.clip_norm = cfg.grad_clip_norm;
  nn::Adam optimizer(adam_cfg);
  const std::vector<nn::Param*> trainable = model.trainable_parameters();

  const int steps_per_epoch = std::max(
      1, static_cast<int>(train_samples.size()) / cfg.batch_size);

  TrainResult result{std::move(model), CheckpointMeta{}, {}};
  SsipNet& net = result.model;
  double best_rmse = std::numeric_limits<double>::infinity();
  std::vector<nn::Matrix> best_params;
  int best_epoch = -1;
  std::optional<double> best_ncc;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(epoch, cfg);
    double loss_sum = 0.0;
    for (int step = 0; step < steps_per_epoch; ++step) {
      ListenerBatch batch;
      if (baseline) {
        // Plain batch: batch_size samples drawn across all listeners.
        std::vector<const Sample*> chosen;
        if (static_cast<int>(flat.size()) <= cfg.batch_size) {
          chosen = flat;
        } else {
          std::vector<std::size_t> idx(flat.size());
          for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
          rng.shuffle(idx);
          for (int i = 0; i < cfg.batch_size; ++i) {
            chosen.push_back(flat[idx[static_cast<std::size_t>(i)]]);
          }
        }
        batch = plain_query_batch(chosen);
      } else {
        const auto& pool =
            *drawable[rng.uniform_int(drawable.size())];
        const int effective_batch =
            std::min<int>(cfg.batch_size, static_cast<int>(pool.size()));
        batch = sample_training_batch(pool, cfg.n_support, effective_batch,
                                      rng);
      }

      nn::Tape tape;
      nn::Binder bind(tape);
      SsipNet::BatchLoss out = net.batch_loss(
          tape, bind, batch, store, cfg.huber_delta, /*training=*/true, &rng);
      const double loss_value = tape.value(out.loss).at(0, 0);
      if (!std::isfinite(loss_value)) {
        throw DivergenceError("non-finite loss at epoch " +
                              std::to_string(epoch) + " step " +
                              std::to_string(step));
      }
      loss_sum += loss_value;
      tape.backward(out.loss);
      optimizer.step(trainable, bind, lr);
    }

    MetricsReport val = evaluate_fixed_episodes(net, val_samples,
                                                cfg.n_support, cfg.seed, store);
    EpochLog log_entry{epoch, loss_sum / steps_per_epoch, lr, val.rmse,
                       val.ncc};
    result.log.push_back(log_entry);
    if (log_stream != nullptr) {
      json j;
      j["epoch"] = log_entry.epoch;
      j["mean_loss"] = log_entry.mean_loss;
      j["lr"] = log_entry.lr;
      j["val_rmse"] = log_entry.val_rmse;
      if (log_entry.val_ncc) {
        j["val_ncc"] = *log_entry.val_ncc;
      } else {
        j["val_ncc"] = nullptr;
      }
      (*log_stream) << j.dump() << "\n";
    }

    if (val.rmse < best_rmse) {
      best_rmse = val.rmse;
      best_ncc = val.ncc;
      best_epoch = epoch;
      best_params = net.parameter_snapshot();
    }
  }

  net.restore_parameters(best_params);
  if (net.backbone()->weight_checksum() != backbone_checksum_before) {
    throw BackboneError("frozen backbone changed during training");
  }

  result.meta.epoch = best_epoch;
  result.meta.val_rmse = best_rmse;
  result.meta.val_ncc = best_ncc;
  result.meta.n_support = cfg.n_support;
  result.meta.seed = cfg.seed;
  for (const auto& [listener, pool] : by_listener) {
    result.meta.train_listeners.insert(listener);
  }
  for (const Sample& s : val_samples) {
    result.meta.val_listeners.insert(s.listener_id);
  }
  result.meta.manifest_hash = cfg.manifest_hash;
  result.meta.curves_hash = cfg.curves_hash;
  return result;
}

}  // namespace ssip
