// include/ssip/nn/tape.hpp

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

#ifndef SSIP_NN_TAPE_HPP_
#define SSIP_NN_TAPE_HPP_

#include <functional>
#include <vector>

#include "ssip/nn/matrix.hpp"
#include "ssip/rng.hpp"

namespace ssip::nn {

/// Handle to a node on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode autodiff over Matrix values. One Tape records one forward
/// pass; backward() walks the nodes in reverse creation order (which is a
/// topological order by construction) and accumulates gradients.
///
/// Single-threaded by design; create independent tapes for parallel work.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Records an input node (copies the value).
  Var leaf(Matrix value);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  /// Gradient of the last backward() root w.r.t. this node.
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

  /// Backpropagates from a 1x1 root node.
  void backward(Var root);

  std::size_t node_count() const { return nodes_.size(); }

  // --- operators ----------------------------------------------------------
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);                 // same shape
  Var sub(Var a, Var b);                 // same shape
  Var add_rowvec(Var a, Var row);        // row broadcast over a's rows
  Var scale(Var a, double s);
  Var add_const(Var a, const Matrix& c); // constant offset, no grad into c
  Var gelu(Var a);                       // exact erf form
  Var relu(Var a);
  Var softmax_rows(Var a);
  Var layer_norm_rows(Var x, Var gain, Var bias, double eps = 1e-5);
  Var mean_rows(Var a);                  // (m x n) -> (1 x n)
  Var concat_rows(const std::vector<Var>& parts);
  Var concat_cols(const std::vector<Var>& parts);
  Var slice_cols(Var a, int col_begin, int col_end);
  Var transpose(Var a);
  /// Inverted dropout: zeroes entries with probability p and scales the
  /// survivors by 1/(1-p). p == 0 is the identity.
  Var dropout(Var a, double p, SeededRng& rng);
  /// Mean Huber loss of (pred - target); pred is (m x 1).
  Var huber_mean(Var pred, const Matrix& targets, double delta);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(Tape&)> backprop;  // empty for leaves
  };

  Var push(Matrix value, std::function<void(Tape&)> backprop);
  Matrix& grad_ref(int id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
};

/// Sinusoidal positional encoding, shape (t x dim). Added to frame
/// sequences before the temporal transformer; the layer transformer
/// deliberately goes without.
Matrix sinusoidal_positional_encoding(int t, int dim);

/// Scalar Huber loss: 0.5 e^2 inside |e| <= delta, linear outside.
double huber(double error, double delta);

}  // namespace ssip::nn

#endif  // SSIP_NN_TAPE_HPP_
