// include/ssip/fem.hpp

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

#ifndef SSIP_FEM_HPP_
#define SSIP_FEM_HPP_

#include <string>
#include <vector>

#include "ssip/backbone.hpp"
#include "ssip/nn/layers.hpp"
#include "ssip/score.hpp"

namespace ssip {

/// What gets concatenated to the audio features as the condition token:
/// the ground-truth score for support samples, the -1 sentinel for query
/// samples, or the audiogram vector in the audiogram-baseline mode.
struct ConditionInput {
  enum class Kind { known_score, unknown_score, audiogram };

  Kind kind = Kind::unknown_score;
  Score score;                            // score kinds only
  std::vector<double> audiogram_vector;   // dB HL values, audiogram kind only

  static ConditionInput known_score(double value) {
    ConditionInput c;
    c.kind = Kind::known_score;
    c.score = Score(value);
    return c;
  }
  static ConditionInput unknown_score() { return ConditionInput{}; }
  static ConditionInput audiogram(std::vector<double> hl_values) {
    ConditionInput c;
    c.kind = Kind::audiogram;
    c.audiogram_vector = std::move(hl_values);
    return c;
  }
};

/// Fixed-length representation of one (audio, condition) pair.
struct Embedding {
  std::vector<double> vector;
  std::string sample_id;
  std::string listener_id;

  int dim() const { return static_cast<int>(vector.size()); }
};

struct FemConfig {
  int embed_dim = 384;        // d2
  int heads = 8;
  int ff_mult = 4;
  double dropout = 0.1;
  int temporal_layers = 1;    // transformer depth over the time axis
  int layer_layers = 1;       // transformer depth over the layer axis
  nn::Activation activation = nn::Activation::gelu;
  int audiogram_dim = 8;      // condition width in audiogram-baseline mode

  nn::TransformerConfig transformer() const {
    return {embed_dim, heads, ff_mult, dropout, activation};
  }
};

/// The feature extraction module. Pipeline per (audio, condition) pair:
///
///   backbone (frozen)     -> L features (t x d1)
///   shared d1->d2 projection, sinusoidal positions, temporal transformer,
///   mean pool over time   -> L features (1 x d2)
///   condition projection  -> 1 extra (1 x d2) token
///   layer transformer (no positions), mean pool over the L+1 slots
///                         -> one (1 x d2) embedding
///
/// The same weights process every backbone layer and every sample.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  /// `backbone_layers`/`backbone_channels` pin the expected input shape
  /// (L and d1).
  FeatureEncoder(const FemConfig& cfg, int backbone_layers,
                 int backbone_channels, SeededRng& rng);

  /// Per backbone layer: projection, positional encoding, temporal
  /// transformer, mean pool. Returns L vars of shape (1 x d2).
  /// Throws DegenerateSignal when the input has zero frames.
  std::vector<nn::Var> temporal_encode(nn::Tape& t, nn::Binder& bind,
                                       const BackboneOutput& bo,
                                       bool training = false,
                                       SeededRng* dropout_rng = nullptr);

  /// Linear projection of the condition into one (1 x d2) token. Known
  /// scores enter scaled to [0, 1]; the sentinel enters as exactly -1;
  /// audiogram thresholds enter scaled by 1/100.
  nn::Var project_condition(nn::Tape& t, nn::Binder& bind,
                            const ConditionInput& c);

  /// Layer transformer plus mean pool over exactly L+1 input vectors.
  /// Throws ShapeError on any other count.
  nn::Var fuse_layers(nn::Tape& t, nn::Binder& bind,
                      const std::vector<nn::Var>& layer_vectors,
                      bool training = false, SeededRng* dropout_rng = nullptr);

  /// Full pipeline composition on an existing tape.
  nn::Var embed(nn::Tape& t, nn::Binder& bind, const BackboneOutput& bo,
                const ConditionInput& c, bool training = false,
                SeededRng* dropout_rng = nullptr);

  /// Inference convenience: runs a private tape and extracts the values.
  Embedding embed_value(const BackboneOutput& bo, const ConditionInput& c,
                        const std::string& sample_id = "",
                        const std::string& listener_id = "");

  int embed_dim() const { return cfg_.embed_dim; }
  int expected_layers() const { return backbone_layers_; }
  const FemConfig& config() const { return cfg_; }

  /// Every FEM parameter, canonical order.
  std::vector<nn::Param*> parameters();
  /// The parameters exercised by one conditioning style; the optimizer uses
  /// this so the unused projection does not sit in the clip-norm sum.
  std::vector<nn::Param*> parameters_for_condition(bool audiogram_mode);

 private:
  FemConfig cfg_;
  int backbone_layers_ = 0;
  int backbone_channels_ = 0;
  nn::LinearLayer input_proj_;       // d1 -> d2, shared across layers
  nn::LinearLayer score_proj_;       // 1 -> d2
  nn::LinearLayer audiogram_proj_;   // audiogram_dim -> d2
  std::vector<nn::TransformerLayer> temporal_;
  std::vector<nn::TransformerLayer> layer_fuse_;
};

}  // namespace ssip

#endif  // SSIP_FEM_HPP_
