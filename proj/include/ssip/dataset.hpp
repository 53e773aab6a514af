// include/ssip/dataset.hpp

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

#ifndef SSIP_DATASET_HPP_
#define SSIP_DATASET_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ssip/calibration.hpp"
#include "ssip/rng.hpp"
#include "ssip/score.hpp"

namespace ssip {

/// One manifest record: an audio signal with listener identity, an optional
/// ground-truth score, optional audiogram and optional level metadata.
struct Sample {
  std::string sample_id;
  std::string listener_id;
  std::string system_id;
  std::string audio_path;
  Score score;
  std::optional<Audiogram> audiogram;
  std::optional<double> original_level_db_spl;
  std::set<int> fold_tags;
};

/// Loads a JSONL manifest, one record per line. Throws FormatError on a
/// malformed record or out-of-range score, DuplicateId on a repeated
/// sample_id, IoError if the file cannot be read.
std::vector<Sample> load_manifest(const std::string& path);

/// Writes samples in the same line-record format. Field order is fixed, so
/// save(load(x)) is byte-stable.
void save_manifest(const std::string& path, const std::vector<Sample>& samples);

/// Listener assignment for one fold. The three sets must be pairwise
/// disjoint; the canonical configuration is 23 train / 3 val / 5 test over
/// a 31-listener pool.
struct SplitSpec {
  int fold_index = 1;
  std::set<std::string> train_listeners;
  std::set<std::string> val_listeners;
  std::set<std::string> test_listeners;

  /// Throws FormatError if the sets overlap.
  void validate() const;
};

SplitSpec load_split(const std::string& path);
void save_split(const std::string& path, const SplitSpec& spec);

/// Builds three rotated listener-disjoint folds from the listeners present
/// in the samples. With 31 listeners the per-fold sizes are exactly
/// 23 train / 3 val / 5 test; other listener counts are split
/// proportionally with at least one listener per role.
std::vector<SplitSpec> make_fold_specs(const std::vector<Sample>& samples);

struct SplitResult {
  std::vector<Sample> train;
  std::vector<Sample> val;
  std::vector<Sample> test;
};

/// Partitions samples by listener membership. Throws UnassignedListener if
/// a sample's listener is in none of the spec's sets.
SplitResult split_by_listener(const std::vector<Sample>& samples,
                              const SplitSpec& spec);

/// One training/eval episode: support pairs plus query audios, all from one
/// listener. Query ground truth is carried for the loss/metrics only and is
/// never presented to the model.
struct ListenerBatch {
  std::string listener_id;
  std::vector<Sample> support;   // scores all known
  std::vector<Sample> queries;   // model sees these with the -1 sentinel
  std::vector<Score> query_targets;  // hidden ground truth, |targets| == |queries|
};

/// Random episode for training: n_support support pairs and
/// (batch_size - n_support) queries drawn without replacement from one
/// listener's pool. Deterministic under a fixed rng state.
/// Throws InsufficientSamples if the pool is smaller than batch_size.
ListenerBatch sample_training_batch(const std::vector<Sample>& pool,
                                    int n_support, int batch_size,
                                    SeededRng& rng);

/// Deterministic evaluation episode: the support set is the first n_support
/// ids of a seed-keyed shuffle of the lexicographically sorted sample ids;
/// every remaining sample becomes a query. Identical across runs and
/// platforms. Throws InsufficientSamples when no queries would remain.
ListenerBatch fixed_eval_episode(const std::vector<Sample>& pool,
                                 int n_support, std::uint64_t seed);

/// Groups samples by listener_id (ordered map: iteration order is the
/// lexicographic listener order, which keeps downstream loops deterministic).
std::map<std::string, std::vector<Sample>> group_by_listener(
    const std::vector<Sample>& samples);

}  // namespace ssip

#endif  // SSIP_DATASET_HPP_
