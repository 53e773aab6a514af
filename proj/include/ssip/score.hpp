// include/ssip/score.hpp

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

#ifndef SSIP_SCORE_HPP_
#define SSIP_SCORE_HPP_

#include "ssip/errors.hpp"

namespace ssip {

/// Intelligibility percent in [0, 100], or the sentinel -1 for "unknown".
/// The sentinel is what query samples feed to the condition projection.
struct Score {
  static constexpr double kUnknown = -1.0;

  double value = kUnknown;

  Score() = default;
  explicit Score(double v) : value(v) {}

  static Score unknown() { return Score(kUnknown); }

  bool is_known() const { return value != kUnknown; }

  bool is_valid() const {
    return value == kUnknown || (value >= 0.0 && value <= 100.0);
  }

  /// Value of a known score; throws UnknownScore on the sentinel.
  double known_value() const {
    if (!is_known()) {
      throw UnknownScore("score is the unknown sentinel (-1)");
    }
    return value;
  }
};

}  // namespace ssip

#endif  // SSIP_SCORE_HPP_
