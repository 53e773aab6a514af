// src/nn/layers.cpp

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

#include "ssip/nn/layers.hpp"

#include <cmath>

#include "ssip/errors.hpp"

namespace ssip::nn {

Matrix xavier_uniform(int rows, int cols, SeededRng& rng) {
  Matrix m(rows, cols);
  const double limit = std::sqrt(6.0 / (rows + cols));
  for (auto& v : m.data) {
    v = rng.uniform(-limit, limit);
  }
  return m;
}

LinearLayer::LinearLayer(const std::string& name, int in, int out,
                         SeededRng& rng)
    : weight(name + ".weight", xavier_uniform(in, out, rng)),
      bias(name + ".bias", Matrix::zeros(1, out)) {}

std::vector<Param*> LinearLayer::parameters() { return {&weight, &bias}; }

TransformerLayer::TransformerLayer(const std::string& name,
                                   const TransformerConfig& cfg, SeededRng& rng)
    : cfg_(cfg) {
  const int d = cfg.model_dim;
  if (d <= 0 || cfg.heads <= 0 || d % cfg.heads != 0) {
    throw ShapeError("transformer: model_dim " + std::to_string(d) +
                     " must be a positive multiple of heads " +
                     std::to_string(cfg.heads));
  }
  const int ff = d * cfg.ff_mult;
  in_proj_weight_ = Param(name + ".attn.in_proj.weight", xavier_uniform(d, 3 * d, rng));
  in_proj_bias_ = Param(name + ".attn.in_proj.bias", Matrix::zeros(1, 3 * d));
  out_proj_weight_ = Param(name + ".attn.out_proj.weight", xavier_uniform(d, d, rng));
  out_proj_bias_ = Param(name + ".attn.out_proj.bias", Matrix::zeros(1, d));
  ff1_weight_ = Param(name + ".ff1.weight", xavier_uniform(d, ff, rng));
  ff1_bias_ = Param(name + ".ff1.bias", Matrix::zeros(1, ff));
  ff2_weight_ = Param(name + ".ff2.weight", xavier_uniform(ff, d, rng));
  ff2_bias_ = Param(name + ".ff2.bias", Matrix::zeros(1, d));
  norm1_gain_ = Param(name + ".norm1.gain", Matrix::full(1, d, 1.0));
  norm1_bias_ = Param(name + ".norm1.bias", Matrix::zeros(1, d));
  norm2_gain_ = Param(name + ".norm2.gain", Matrix::full(1, d, 1.0));
  norm2_bias_ = Param(name + ".norm2.bias", Matrix::zeros(1, d));
}

Var TransformerLayer::apply(Tape& t, Binder& bind, Var x, bool training,
                            SeededRng* dropout_rng) {
  const int d = cfg_.model_dim;
  if (t.value(x).cols != d) {
    throw ShapeError("transformer input has " +
                     std::to_string(t.value(x).cols) + " channels, expected " +
                     std::to_string(d));
  }
  const bool drop = training && cfg_.dropout > 0.0;
  if (drop && dropout_rng == nullptr) {
    throw RangeError("training with dropout requires an rng");
  }

  // Multi-head self-attention.
  Var qkv = t.add_rowvec(t.matmul(x, bind(in_proj_weight_)), bind(in_proj_bias_));
  const int dh = d / cfg_.heads;
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> head_outputs;
  head_outputs.reserve(cfg_.heads);
  for (int h = 0; h < cfg_.heads; ++h) {
    Var q = t.slice_cols(qkv, h * dh, (h + 1) * dh);
    Var k = t.slice_cols(qkv, d + h * dh, d + (h + 1) * dh);
    Var v = t.slice_cols(qkv, 2 * d + h * dh, 2 * d + (h + 1) * dh);
    Var scores = t.scale(t.matmul(q, t.transpose(k)), attn_scale);
    Var attn = t.softmax_rows(scores);
    if (drop) {
      attn = t.dropout(attn, cfg_.dropout, *dropout_rng);
    }
    head_outputs.push_back(t.matmul(attn, v));
  }
  Var attn_out = t.add_rowvec(
      t.matmul(t.concat_cols(head_outputs), bind(out_proj_weight_)),
      bind(out_proj_bias_));
  if (drop) {
    attn_out = t.dropout(attn_out, cfg_.dropout, *dropout_rng);
  }
  Var x1 = t.layer_norm_rows(t.add(x, attn_out), bind(norm1_gain_),
                             bind(norm1_bias_));

  // Position-wise feed-forward.
  Var hidden = t.add_rowvec(t.matmul(x1, bind(ff1_weight_)), bind(ff1_bias_));
  hidden = cfg_.activation == Activation::gelu ? t.gelu(hidden) : t.relu(hidden);
  Var ff_out = t.add_rowvec(t.matmul(hidden, bind(ff2_weight_)), bind(ff2_bias_));
  if (drop) {
    ff_out = t.dropout(ff_out, cfg_.dropout, *dropout_rng);
  }
  return t.layer_norm_rows(t.add(x1, ff_out), bind(norm2_gain_),
                           bind(norm2_bias_));
}

std::vector<Param*> TransformerLayer::parameters() {
  return {&in_proj_weight_, &in_proj_bias_, &out_proj_weight_, &out_proj_bias_,
          &ff1_weight_,     &ff1_bias_,     &ff2_weight_,      &ff2_bias_,
          &norm1_gain_,     &norm1_bias_,   &norm2_gain_,      &norm2_bias_};
}

}  // namespace ssip::nn
