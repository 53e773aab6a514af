// include/ssip/errors.hpp

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

#ifndef SSIP_ERRORS_HPP_
#define SSIP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace ssip {

/// Base class of every error this toolkit raises on purpose. CLI commands
/// catch Error, print a machine-readable record and exit nonzero.
class Error : public std::runtime_error {
 public:
  Error(const std::string& kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define SSIP_DEFINE_ERROR(NAME)                            \
  class NAME : public Error {                              \
   public:                                                 \
    explicit NAME(const std::string& message)              \
        : Error(#NAME, message) {}                         \
  };

SSIP_DEFINE_ERROR(DegenerateSignal)     // all-zero/empty audio, no frames
SSIP_DEFINE_ERROR(IoError)              // missing file, failed read/write
SSIP_DEFINE_ERROR(FormatError)          // unparseable or out-of-range input
SSIP_DEFINE_ERROR(InvalidCurve)         // non-monotone calibration curve
SSIP_DEFINE_ERROR(IncompleteAudiogram)  // required frequency missing
SSIP_DEFINE_ERROR(UnknownScore)         // sentinel score where a value is required
SSIP_DEFINE_ERROR(DuplicateId)          // repeated sample_id in a manifest
SSIP_DEFINE_ERROR(UnassignedListener)   // listener not covered by a SplitSpec
SSIP_DEFINE_ERROR(InsufficientSamples)  // pool too small for the requested batch
SSIP_DEFINE_ERROR(ShapeError)           // dimension mismatch
SSIP_DEFINE_ERROR(EmptyInput)           // empty sequence where data is required
SSIP_DEFINE_ERROR(EmptySupport)         // empty support set
SSIP_DEFINE_ERROR(RangeError)           // scalar argument outside its domain
SSIP_DEFINE_ERROR(BackboneError)        // backbone unavailable or cache miss
SSIP_DEFINE_ERROR(DivergenceError)      // non-finite loss during training
SSIP_DEFINE_ERROR(LeakageError)         // train/test listener overlap

#undef SSIP_DEFINE_ERROR

}  // namespace ssip

#endif  // SSIP_ERRORS_HPP_
