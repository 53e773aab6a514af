// include/ssip/nn/adam.hpp

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

#ifndef SSIP_NN_ADAM_HPP_
#define SSIP_NN_ADAM_HPP_

#include <vector>

#include "ssip/nn/layers.hpp"

namespace ssip::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-8;
  double clip_norm = 1.0;  // global gradient norm; <= 0 disables clipping
};

/// Adaptive-moment optimizer with bias correction and optional global-norm
/// gradient clipping. Moment buffers live on the Params themselves, so a
/// checkpointed model resumes with fresh state by design.
class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  /// One update over `params` with gradients taken from `binder` (after a
  /// backward() pass). `lr` is supplied per step so a scheduler can drive it.
  /// Returns the pre-clip global gradient norm.
  double step(const std::vector<Param*>& params, const Binder& binder,
              double lr);

  int steps_taken() const { return step_count_; }

 private:
  AdamConfig cfg_;
  int step_count_ = 0;
};

}  // namespace ssip::nn

#endif  // SSIP_NN_ADAM_HPP_
