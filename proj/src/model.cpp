// src/model.cpp

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

#include "ssip/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ssip/errors.hpp"
#include "ssip/hash.hpp"
#include "ssip/wav_io.hpp"

namespace ssip {

using nlohmann::json;
using nn::Binder;
using nn::Matrix;
using nn::Tape;
using nn::Var;

std::shared_ptr<BackboneExtractor> make_backbone(const BackboneConfig& cfg) {
  if (cfg.kind == BackboneConfig::Kind::toy) {
    return std::make_shared<ToyBackbone>(cfg.toy);
  }
  if (cfg.feature_cache_dir.empty()) {
    throw BackboneError(
        "foundation backbone needs a feature cache directory; extract "
        "encoder features externally and point feature_cache_dir at them");
  }
  return std::make_shared<FeatureCacheBackbone>(
      cfg.feature_cache_dir, cfg.foundation_layers, cfg.foundation_channels);
}

json ModelConfig::to_json() const {
  json j;
  j["mode"] = mode == PredictionMode::ssip ? "ssip" : "audiogram_baseline";
  j["embed_dim"] = fem.embed_dim;
  j["heads"] = fem.heads;
  j["ff_mult"] = fem.ff_mult;
  j["dropout"] = fem.dropout;
  j["temporal_layers"] = fem.temporal_layers;
  j["layer_layers"] = fem.layer_layers;
  j["activation"] =
      fem.activation == nn::Activation::gelu ? "gelu" : "relu";
  j["audiogram_frequencies"] = audiogram_frequencies;
  j["init_seed"] = init_seed;
  json b;
  b["kind"] = backbone.kind == BackboneConfig::Kind::toy ? "toy" : "foundation";
  if (backbone.kind == BackboneConfig::Kind::toy) {
    b["layers"] = backbone.toy.layers;
    b["channels"] = backbone.toy.channels;
    b["frame_size"] = backbone.toy.frame_size;
    b["hop"] = backbone.toy.hop;
    b["seed"] = backbone.toy.seed;
  } else {
    b["layers"] = backbone.foundation_layers;
    b["channels"] = backbone.foundation_channels;
    b["feature_cache_dir"] = backbone.feature_cache_dir;
  }
  j["backbone"] = std::move(b);
  return j;
}

ModelConfig ModelConfig::from_json(const json& j) {
  ModelConfig cfg;
  try {
    const std::string mode = j.value("mode", "ssip");
    if (mode == "ssip") {
      cfg.mode = PredictionMode::ssip;
    } else if (mode == "audiogram_baseline") {
      cfg.mode = PredictionMode::audiogram_baseline;
    } else {
      throw FormatError("unknown mode '" + mode + "'");
    }
    cfg.fem.embed_dim = j.value("embed_dim", cfg.fem.embed_dim);
    cfg.fem.heads = j.value("heads", cfg.fem.heads);
    cfg.fem.ff_mult = j.value("ff_mult", cfg.fem.ff_mult);
    cfg.fem.dropout = j.value("dropout", cfg.fem.dropout);
    cfg.fem.temporal_layers = j.value("temporal_layers", cfg.fem.temporal_layers);
    cfg.fem.layer_layers = j.value("layer_layers", cfg.fem.layer_layers);
    const std::string act = j.value("activation", "gelu");
    if (act == "gelu") {
      cfg.fem.activation = nn::Activation::gelu;
    } else if (act == "relu") {
      cfg.fem.activation = nn::Activation::relu;
    } else {
      throw FormatError("unknown activation '" + act + "'");
    }
    if (j.contains("audiogram_frequencies")) {
      cfg.audiogram_frequencies =
          j.at("audiogram_frequencies").get<std::vector<int>>();
    }
    cfg.fem.audiogram_dim = static_cast<int>(cfg.audiogram_frequencies.size());
    cfg.init_seed = j.value("init_seed", cfg.init_seed);
    if (j.contains("backbone")) {
      const json& b = j.at("backbone");
      const std::string kind = b.value("kind", "toy");
      if (kind == "toy") {
        cfg.backbone.kind = BackboneConfig::Kind::toy;
        cfg.backbone.toy.layers = b.value("layers", cfg.backbone.toy.layers);
        cfg.backbone.toy.channels = b.value("channels", cfg.backbone.toy.channels);
        cfg.backbone.toy.frame_size =
            b.value("frame_size", cfg.backbone.toy.frame_size);
        cfg.backbone.toy.hop = b.value("hop", cfg.backbone.toy.hop);
        cfg.backbone.toy.seed = b.value("seed", cfg.backbone.toy.seed);
      } else if (kind == "foundation") {
        cfg.backbone.kind = BackboneConfig::Kind::foundation;
        cfg.backbone.foundation_layers =
            b.value("layers", cfg.backbone.foundation_layers);
        cfg.backbone.foundation_channels =
            b.value("channels", cfg.backbone.foundation_channels);
        cfg.backbone.feature_cache_dir = b.value("feature_cache_dir", "");
      } else {
        throw FormatError("unknown backbone kind '" + kind + "'");
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
  return cfg;
}

const BackboneOutput& FeatureStore::features(const Sample& s) {
  auto it = cache_.find(s.sample_id);
  if (it != cache_.end()) {
    return it->second;
  }
  BackboneOutput bo;
  auto wit = waveform_overrides_.find(s.sample_id);
  if (wit != waveform_overrides_.end()) {
    bo = backbone_->extract(wit->second, s.sample_id);
  } else if (dynamic_cast<const FeatureCacheBackbone*>(backbone_.get()) !=
             nullptr) {
    // Feature-cache backbones never touch the audio itself.
    bo = backbone_->extract(Waveform{}, s.sample_id);
  } else {
    bo = backbone_->extract(load_waveform(s.audio_path), s.sample_id);
  }
  return cache_.emplace(s.sample_id, std::move(bo)).first->second;
}

SsipNet::SsipNet(const ModelConfig& cfg)
    : cfg_(cfg), backbone_(make_backbone(cfg.backbone)) {
  if (cfg_.fem.audiogram_dim !=
      static_cast<int>(cfg_.audiogram_frequencies.size())) {
    throw ShapeError("fem.audiogram_dim must match audiogram_frequencies");
  }
  SeededRng rng(cfg_.init_seed);
  fem_ = FeatureEncoder(cfg_.fem, backbone_->layer_count(),
                        backbone_->channel_dim(), rng);
  head_ = nn::LinearLayer("spm.head", 2 * cfg_.fem.embed_dim, 1, rng);
  baseline_head_ = nn::LinearLayer("spm.baseline_head", cfg_.fem.embed_dim, 1, rng);
}

ConditionInput SsipNet::support_condition(const Sample& s) const {
  if (cfg_.mode == PredictionMode::audiogram_baseline) {
    return query_condition(s);
  }
  return ConditionInput::known_score(s.score.known_value());
}

ConditionInput SsipNet::query_condition(const Sample& s) const {
  if (cfg_.mode == PredictionMode::audiogram_baseline) {
    if (!s.audiogram) {
      throw IncompleteAudiogram("sample '" + s.sample_id +
                                "' has no audiogram (baseline mode)");
    }
    std::vector<double> values;
    values.reserve(cfg_.audiogram_frequencies.size());
    for (int f : cfg_.audiogram_frequencies) {
      auto it = s.audiogram->thresholds.find(f);
      if (it == s.audiogram->thresholds.end()) {
        throw IncompleteAudiogram("sample '" + s.sample_id +
                                  "' audiogram is missing " +
                                  std::to_string(f) + " Hz");
      }
      values.push_back(it->second);
    }
    return ConditionInput::audiogram(std::move(values));
  }
  return ConditionInput::unknown_score();
}

Embedding SsipNet::embed_sample(const Sample& s, const ConditionInput& c,
                                FeatureStore& store) {
  return fem_.embed_value(store.features(s), c, s.sample_id, s.listener_id);
}

namespace {
nn::Matrix scaled_copy(const Matrix& m, double factor) {
  Matrix out = m;
  for (auto& v : out.data) v *= factor;
  return out;
}
}  // namespace

nn::Matrix SsipNet::head_weight() const {
  return scaled_copy(head_.weight.value, kOutputScale);
}

nn::Matrix SsipNet::head_bias() const {
  return scaled_copy(head_.bias.value, kOutputScale);
}

std::vector<Prediction> SsipNet::forward_batch(const ListenerBatch& b,
                                               FeatureStore& store) {
  if (b.queries.empty()) {
    throw EmptyInput("batch has no queries");
  }
  // One tape for the whole episode: parameters bind once and every
  // embedding shares them.
  Tape tape;
  Binder bind(tape);
  std::vector<Prediction> out;
  out.reserve(b.queries.size());

  if (cfg_.mode == PredictionMode::audiogram_baseline) {
    for (const Sample& q : b.queries) {
      Var e = fem_.embed(tape, bind, store.features(q), query_condition(q));
      const Matrix& ev = tape.value(e);
      double acc = baseline_head_.bias.value.at(0, 0);
      for (int j = 0; j < ev.cols; ++j) {
        acc += ev.at(0, j) * baseline_head_.weight.value.at(j, 0);
      }
      acc *= kOutputScale;
      Prediction p;
      p.sample_id = q.sample_id;
      p.listener_id = q.listener_id;
      p.predicted_score = acc;
      p.reported_score = clamp_score(acc);
      out.push_back(std::move(p));
    }
    return out;
  }

  SupportSet support;
  for (const Sample& s : b.support) {
    Var e = fem_.embed(tape, bind, store.features(s), support_condition(s));
    Embedding emb;
    emb.vector = tape.value(e).data;
    emb.sample_id = s.sample_id;
    emb.listener_id = s.listener_id;
    support.embeddings.push_back(std::move(emb));
  }
  const std::vector<double> agg = aggregate_support(support);
  const Matrix w = head_weight();
  const Matrix bias = head_bias();
  for (const Sample& q : b.queries) {
    Var e = fem_.embed(tape, bind, store.features(q), query_condition(q));
    Embedding emb;
    emb.vector = tape.value(e).data;
    emb.sample_id = q.sample_id;
    emb.listener_id = q.listener_id;
    out.push_back(predict_query(agg, emb, w, bias));
  }
  return out;
}

SsipNet::BatchLoss SsipNet::batch_loss(Tape& t, Binder& bind,
                                       const ListenerBatch& b,
                                       FeatureStore& store, double huber_delta,
                                       bool training, SeededRng* dropout_rng) {
  if (b.queries.empty()) {
    throw EmptyInput("batch has no queries");
  }
  if (b.query_targets.size() != b.queries.size()) {
    throw ShapeError("batch has " + std::to_string(b.queries.size()) +
                     " queries but " + std::to_string(b.query_targets.size()) +
                     " targets");
  }

  std::vector<Var> query_preds;
  query_preds.reserve(b.queries.size());

  if (cfg_.mode == PredictionMode::audiogram_baseline) {
    for (const Sample& q : b.queries) {
      Var e = fem_.embed(t, bind, store.features(q), query_condition(q),
                         training, dropout_rng);
      query_preds.push_back(baseline_head_.apply(t, bind, e));
    }
  } else {
    if (b.support.empty()) {
      throw EmptySupport("training batch has no support samples");
    }
    // Canonical summation order for the aggregate: sorted sample_id.
    std::vector<const Sample*> sorted;
    sorted.reserve(b.support.size());
    for (const Sample& s : b.support) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(),
              [](const Sample* a, const Sample* b) {
                return a->sample_id < b->sample_id;
              });
    std::vector<Var> support_embeddings;
    support_embeddings.reserve(sorted.size());
    for (const Sample* s : sorted) {
      support_embeddings.push_back(fem_.embed(t, bind, store.features(*s),
                                              support_condition(*s), training,
                                              dropout_rng));
    }
    Var aggregate = t.mean_rows(t.concat_rows(support_embeddings));
    for (const Sample& q : b.queries) {
      Var e = fem_.embed(t, bind, store.features(q), query_condition(q),
                         training, dropout_rng);
      Var cat = t.concat_cols({aggregate, e});
      query_preds.push_back(head_.apply(t, bind, cat));
    }
  }

  // Heads produce score/100; the loss runs on that scale and reported
  // predictions carry the fixed x100 output scale.
  Var internal = t.concat_rows(query_preds);  // (n x 1), score/100 scale
  Matrix targets(static_cast<int>(b.query_targets.size()), 1);
  for (std::size_t i = 0; i < b.query_targets.size(); ++i) {
    targets.at(static_cast<int>(i), 0) =
        b.query_targets[i].known_value() / kOutputScale;
  }
  Var loss = t.huber_mean(internal, targets, huber_delta);
  return BatchLoss{loss, t.scale(internal, kOutputScale)};
}

std::vector<nn::Param*> SsipNet::trainable_parameters() {
  const bool baseline = cfg_.mode == PredictionMode::audiogram_baseline;
  std::vector<nn::Param*> out = fem_.parameters_for_condition(baseline);
  auto& head = baseline ? baseline_head_ : head_;
  for (auto* p : head.parameters()) out.push_back(p);
  return out;
}

std::vector<nn::Param*> SsipNet::all_parameters() {
  std::vector<nn::Param*> out = fem_.parameters();
  for (auto* p : head_.parameters()) out.push_back(p);
  for (auto* p : baseline_head_.parameters()) out.push_back(p);
  return out;
}

std::uint64_t SsipNet::parameter_checksum() {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const nn::Param* p : all_parameters()) {
    h = fnv1a64(p->name.data(), p->name.size(), h);
    h = fnv1a64(p->value.data.data(), p->value.data.size() * sizeof(double), h);
  }
  return h;
}

std::vector<Matrix> SsipNet::parameter_snapshot() {
  std::vector<Matrix> out;
  for (const nn::Param* p : all_parameters()) {
    out.push_back(p->value);
  }
  return out;
}

void SsipNet::restore_parameters(const std::vector<Matrix>& snapshot) {
  auto params = all_parameters();
  if (snapshot.size() != params.size()) {
    throw ShapeError("parameter snapshot size mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->value.same_shape(snapshot[i])) {
      throw ShapeError("parameter snapshot shape mismatch at " +
                       params[i]->name);
    }
    params[i]->value = snapshot[i];
  }
}

namespace {
constexpr char kCheckpointMagic[] = "SSIPCKPT v1\n";

json meta_to_json(const CheckpointMeta& meta) {
  json j;
  j["epoch"] = meta.epoch;
  j["val_rmse"] = meta.val_rmse;
  if (meta.val_ncc) {
    j["val_ncc"] = *meta.val_ncc;
  } else {
    j["val_ncc"] = nullptr;
  }
  j["n_support"] = meta.n_support;
  j["seed"] = meta.seed;
  j["train_listeners"] = meta.train_listeners;
  j["val_listeners"] = meta.val_listeners;
  j["manifest_hash"] = meta.manifest_hash;
  j["curves_hash"] = meta.curves_hash;
  return j;
}

CheckpointMeta meta_from_json(const json& j) {
  CheckpointMeta meta;
  meta.epoch = j.value("epoch", 0);
  meta.val_rmse = j.value("val_rmse", 0.0);
  if (j.contains("val_ncc") && !j.at("val_ncc").is_null()) {
    meta.val_ncc = j.at("val_ncc").get<double>();
  }
  meta.n_support = j.value("n_support", 0);
  meta.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("train_listeners")) {
    for (const auto& l : j.at("train_listeners")) {
      meta.train_listeners.insert(l.get<std::string>());
    }
  }
  if (j.contains("val_listeners")) {
    for (const auto& l : j.at("val_listeners")) {
      meta.val_listeners.insert(l.get<std::string>());
    }
  }
  meta.manifest_hash = j.value("manifest_hash", "");
  meta.curves_hash = j.value("curves_hash", "");
  return meta;
}
}  // namespace

void save_checkpoint(const std::string& path, SsipNet& model,
                     const CheckpointMeta& meta) {
  json header;
  header["config"] = model.config().to_json();
  header["meta"] = meta_to_json(meta);
  json param_table = json::array();
  for (const nn::Param* p : model.all_parameters()) {
    param_table.push_back(
        {{"name", p->name}, {"rows", p->value.rows}, {"cols", p->value.cols}});
  }
  header["params"] = std::move(param_table);
  const std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
  const std::uint64_t len = header_str.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(header_str.data(), static_cast<std::streamsize>(len));
  for (const nn::Param* p : model.all_parameters()) {
    out.write(reinterpret_cast<const char*>(p->value.data.data()),
              static_cast<std::streamsize>(p->value.data.size() *
                                           sizeof(double)));
  }
  if (!out) {
    throw IoError("short write to " + path);
  }
}

LoadedCheckpoint load_checkpoint(const std::string& path,
                                 const std::string& feature_cache_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open checkpoint: " + path);
  }
  char magic[sizeof(kCheckpointMagic) - 1];
  if (!in.read(magic, sizeof magic) ||
      std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw FormatError("bad checkpoint magic in " + path);
  }
  std::uint64_t len = 0;
  if (!in.read(reinterpret_cast<char*>(&len), sizeof len) || len == 0 ||
      len > (1ull << 30)) {
    throw FormatError("bad checkpoint header length in " + path);
  }
  std::string header_str(len, '\0');
  if (!in.read(header_str.data(), static_cast<std::streamsize>(len))) {
    throw FormatError("truncated checkpoint header in " + path);
  }
  json header;
  try {
    header = json::parse(header_str);
  } catch (const json::exception& e) {
    throw FormatError("checkpoint header parse failure in " + path + ": " +
                      e.what());
  }

  ModelConfig cfg = ModelConfig::from_json(header.at("config"));
  if (!feature_cache_override.empty()) {
    cfg.backbone.feature_cache_dir = feature_cache_override;
  }
  SsipNet model(cfg);
  auto params = model.all_parameters();
  const json& table = header.at("params");
  if (table.size() != params.size()) {
    throw FormatError("checkpoint parameter table size mismatch in " + path);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const json& row = table.at(i);
    if (row.at("name").get<std::string>() != params[i]->name ||
        row.at("rows").get<int>() != params[i]->value.rows ||
        row.at("cols").get<int>() != params[i]->value.cols) {
      throw FormatError("checkpoint parameter '" + params[i]->name +
                        "' does not match the rebuilt model in " + path);
    }
    if (!in.read(reinterpret_cast<char*>(params[i]->value.data.data()),
                 static_cast<std::streamsize>(params[i]->value.data.size() *
                                              sizeof(double)))) {
      throw FormatError("truncated checkpoint data in " + path);
    }
  }
  return LoadedCheckpoint{std::move(model), meta_from_json(header.at("meta"))};
}

}  // namespace ssip
