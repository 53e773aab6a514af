// src/fem.cpp

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

#include "ssip/fem.hpp"

#include "ssip/errors.hpp"

namespace ssip {

using nn::Binder;
using nn::Matrix;
using nn::Tape;
using nn::Var;

FeatureEncoder::FeatureEncoder(const FemConfig& cfg, int backbone_layers,
                               int backbone_channels, SeededRng& rng)
    : cfg_(cfg),
      backbone_layers_(backbone_layers),
      backbone_channels_(backbone_channels),
      input_proj_("fem.input_proj", backbone_channels, cfg.embed_dim, rng),
      score_proj_("fem.score_proj", 1, cfg.embed_dim, rng),
      audiogram_proj_("fem.audiogram_proj", cfg.audiogram_dim, cfg.embed_dim,
                      rng) {
  if (backbone_layers < 1 || backbone_channels < 1) {
    throw RangeError("feature encoder needs a positive backbone shape");
  }
  for (int i = 0; i < cfg.temporal_layers; ++i) {
    temporal_.emplace_back("fem.temporal" + std::to_string(i),
                           cfg.transformer(), rng);
  }
  for (int i = 0; i < cfg.layer_layers; ++i) {
    layer_fuse_.emplace_back("fem.layer_fuse" + std::to_string(i),
                             cfg.transformer(), rng);
  }
}

std::vector<Var> FeatureEncoder::temporal_encode(Tape& t, Binder& bind,
                                                 const BackboneOutput& bo,
                                                 bool training,
                                                 SeededRng* dropout_rng) {
  if (bo.layer_count() != backbone_layers_) {
    throw ShapeError("backbone produced " + std::to_string(bo.layer_count()) +
                     " layers, encoder expects " +
                     std::to_string(backbone_layers_));
  }
  if (bo.frames() == 0) {
    throw DegenerateSignal("backbone output has zero frames");
  }
  if (bo.channel_dim() != backbone_channels_) {
    throw ShapeError("backbone channel width " +
                     std::to_string(bo.channel_dim()) + ", encoder expects " +
                     std::to_string(backbone_channels_));
  }

  const Matrix positions =
      nn::sinusoidal_positional_encoding(bo.frames(), cfg_.embed_dim);
  std::vector<Var> encoded;
  encoded.reserve(bo.layer_features.size());
  for (const Matrix& features : bo.layer_features) {
    Var x = input_proj_.apply(t, bind, t.leaf(features));
    x = t.add_const(x, positions);
    for (auto& layer : temporal_) {
      x = layer.apply(t, bind, x, training, dropout_rng);
    }
    encoded.push_back(t.mean_rows(x));
  }
  return encoded;
}

Var FeatureEncoder::project_condition(Tape& t, Binder& bind,
                                      const ConditionInput& c) {
  switch (c.kind) {
    case ConditionInput::Kind::known_score: {
      Matrix in(1, 1);
      in.at(0, 0) = c.score.known_value() / 100.0;
      return score_proj_.apply(t, bind, t.leaf(std::move(in)));
    }
    case ConditionInput::Kind::unknown_score: {
      Matrix in(1, 1);
      in.at(0, 0) = Score::kUnknown;  // the sentinel bypasses score scaling
      return score_proj_.apply(t, bind, t.leaf(std::move(in)));
    }
    case ConditionInput::Kind::audiogram: {
      if (static_cast<int>(c.audiogram_vector.size()) != cfg_.audiogram_dim) {
        throw ShapeError("audiogram condition has " +
                         std::to_string(c.audiogram_vector.size()) +
                         " values, configured width is " +
                         std::to_string(cfg_.audiogram_dim));
      }
      Matrix in(1, cfg_.audiogram_dim);
      for (int j = 0; j < cfg_.audiogram_dim; ++j) {
        in.at(0, j) = c.audiogram_vector[j] / 100.0;
      }
      return audiogram_proj_.apply(t, bind, t.leaf(std::move(in)));
    }
  }
  throw RangeError("unreachable condition kind");
}

Var FeatureEncoder::fuse_layers(Tape& t, Binder& bind,
                                const std::vector<Var>& layer_vectors,
                                bool training, SeededRng* dropout_rng) {
  const int expected = backbone_layers_ + 1;
  if (static_cast<int>(layer_vectors.size()) != expected) {
    throw ShapeError("fuse_layers got " +
                     std::to_string(layer_vectors.size()) +
                     " vectors, expected " + std::to_string(expected));
  }
  // No positional encoding on the layer axis; the condition token sits in
  // the fixed final slot.
  Var stack = t.concat_rows(layer_vectors);
  for (auto& layer : layer_fuse_) {
    stack = layer.apply(t, bind, stack, training, dropout_rng);
  }
  return t.mean_rows(stack);
}

Var FeatureEncoder::embed(Tape& t, Binder& bind, const BackboneOutput& bo,
                          const ConditionInput& c, bool training,
                          SeededRng* dropout_rng) {
  std::vector<Var> tokens = temporal_encode(t, bind, bo, training, dropout_rng);
  tokens.push_back(project_condition(t, bind, c));
  return fuse_layers(t, bind, tokens, training, dropout_rng);
}

Embedding FeatureEncoder::embed_value(const BackboneOutput& bo,
                                      const ConditionInput& c,
                                      const std::string& sample_id,
                                      const std::string& listener_id) {
  Tape tape;
  Binder bind(tape);
  Var v = embed(tape, bind, bo, c);
  Embedding e;
  e.vector = tape.value(v).data;
  e.sample_id = sample_id;
  e.listener_id = listener_id;
  return e;
}

std::vector<nn::Param*> FeatureEncoder::parameters() {
  std::vector<nn::Param*> out;
  for (auto* p : input_proj_.parameters()) out.push_back(p);
  for (auto* p : score_proj_.parameters()) out.push_back(p);
  for (auto* p : audiogram_proj_.parameters()) out.push_back(p);
  for (auto& layer : temporal_) {
    for (auto* p : layer.parameters()) out.push_back(p);
  }
  for (auto& layer : layer_fuse_) {
    for (auto* p : layer.parameters()) out.push_back(p);
  }
  return out;
}

std::vector<nn::Param*> FeatureEncoder::parameters_for_condition(
    bool audiogram_mode) {
  std::vector<nn::Param*> out;
  for (auto* p : input_proj_.parameters()) out.push_back(p);
  auto& proj = audiogram_mode ? audiogram_proj_ : score_proj_;
  for (auto* p : proj.parameters()) out.push_back(p);
  for (auto& layer : temporal_) {
    for (auto* p : layer.parameters()) out.push_back(p);
  }
  for (auto& layer : layer_fuse_) {
    for (auto* p : layer.parameters()) out.push_back(p);
  }
  return out;
}

}  // namespace ssip
