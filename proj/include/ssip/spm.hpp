// include/ssip/spm.hpp

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

#ifndef SSIP_SPM_HPP_
#define SSIP_SPM_HPP_

#include <string>
#include <vector>

#include "ssip/fem.hpp"

namespace ssip {

/// One listener's support embeddings. Non-empty, one listener, one width.
struct SupportSet {
  std::vector<Embedding> embeddings;

  /// Throws EmptySupport / FormatError / ShapeError on invariant violations.
  void validate() const;
};

struct Prediction {
  std::string sample_id;
  std::string listener_id;
  double predicted_score = 0.0;  // unclamped head output
  double reported_score = 0.0;   // clamped to [0, 100]
};

/// Element-wise global average pooling over the support embeddings.
/// Summation runs in canonical order (sorted by sample_id), so the result
/// is bitwise identical under any permutation of the input.
std::vector<double> aggregate_support(const SupportSet& s);

/// Linear head over the channel-wise concatenation [aggregate ; query].
/// `weight` is (2*d2 x 1), `bias` (1 x 1). Throws ShapeError on mismatch.
Prediction predict_query(const std::vector<double>& aggregate,
                         const Embedding& query, const nn::Matrix& weight,
                         const nn::Matrix& bias);

double clamp_score(double raw);

}  // namespace ssip

#endif  // SSIP_SPM_HPP_
