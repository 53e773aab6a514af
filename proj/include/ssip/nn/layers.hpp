// include/ssip/nn/layers.hpp

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

#ifndef SSIP_NN_LAYERS_HPP_
#define SSIP_NN_LAYERS_HPP_

#include <string>
#include <unordered_map>
#include <vector>

#include "ssip/nn/tape.hpp"

namespace ssip::nn {

/// A named trainable matrix plus its Adam state.
struct Param {
  std::string name;
  Matrix value;
  Matrix adam_m;
  Matrix adam_v;

  Param() = default;
  Param(std::string n, Matrix v)
      : name(std::move(n)),
        value(std::move(v)),
        adam_m(value.rows, value.cols),
        adam_v(value.rows, value.cols) {}
};

/// Xavier-uniform weight init.
Matrix xavier_uniform(int rows, int cols, SeededRng& rng);

/// Binds Params onto one Tape, creating at most one leaf per Param, and
/// gives access to their gradients after backward().
class Binder {
 public:
  explicit Binder(Tape& tape) : tape_(&tape) {}

  Var operator()(Param& p) {
    auto it = vars_.find(&p);
    if (it != vars_.end()) {
      return it->second;
    }
    Var v = tape_->leaf(p.value);
    vars_.emplace(&p, v);
    return v;
  }

  bool bound(const Param& p) const { return vars_.count(const_cast<Param*>(&p)) > 0; }

  /// Gradient of the last backward() root w.r.t. p. Zero matrix if p never
  /// entered the graph.
  Matrix gradient(const Param& p) const {
    auto it = vars_.find(const_cast<Param*>(&p));
    if (it == vars_.end()) {
      return Matrix::zeros(p.value.rows, p.value.cols);
    }
    return tape_->grad(it->second);
  }

 private:
  Tape* tape_;
  std::unordered_map<Param*, Var> vars_;
};

struct LinearLayer {
  Param weight;  // (in x out)
  Param bias;    // (1 x out)

  LinearLayer() = default;
  LinearLayer(const std::string& name, int in, int out, SeededRng& rng);

  Var apply(Tape& t, Binder& bind, Var x) {
    return t.add_rowvec(t.matmul(x, bind(weight)), bind(bias));
  }

  std::vector<Param*> parameters();
};

enum class Activation { gelu, relu };

struct TransformerConfig {
  int model_dim = 384;
  int heads = 8;
  int ff_mult = 4;
  double dropout = 0.1;
  Activation activation = Activation::gelu;
};

/// One post-norm transformer encoder layer:
///   x1 = LN(x + Dropout(MultiHeadSelfAttention(x)))
///   x2 = LN(x1 + Dropout(FF(x1)))
/// Positional information, when wanted, is added by the caller before apply.
class TransformerLayer {
 public:
  TransformerLayer() = default;
  TransformerLayer(const std::string& name, const TransformerConfig& cfg,
                   SeededRng& rng);

  /// x is (t x model_dim). dropout_rng must be non-null when training with
  /// a nonzero dropout rate.
  Var apply(Tape& t, Binder& bind, Var x, bool training = false,
            SeededRng* dropout_rng = nullptr);

  std::vector<Param*> parameters();
  const TransformerConfig& config() const { return cfg_; }

 private:
  TransformerConfig cfg_;
  Param in_proj_weight_;   // (d x 3d), fused Q/K/V
  Param in_proj_bias_;     // (1 x 3d)
  Param out_proj_weight_;  // (d x d)
  Param out_proj_bias_;    // (1 x d)
  Param ff1_weight_;       // (d x ff)
  Param ff1_bias_;
  Param ff2_weight_;       // (ff x d)
  Param ff2_bias_;
  Param norm1_gain_, norm1_bias_;
  Param norm2_gain_, norm2_bias_;
};

}  // namespace ssip::nn

#endif  // SSIP_NN_LAYERS_HPP_
