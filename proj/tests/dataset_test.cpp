// tests/dataset_test.cpp

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

#include <algorithm>
#include <fstream>
#include <set>

#include "doctest.h"
#include "ssip/dataset.hpp"
#include "ssip/errors.hpp"
#include "test_util.hpp"

using namespace ssip;
using ssip::test::scratch_dir;

namespace {

std::vector<Sample> listener_pool(const std::string& listener_id, int count,
                                  int id_offset = 0) {
  std::vector<Sample> pool;
  for (int i = 0; i < count; ++i) {
    Sample s;
    s.sample_id = listener_id + "_s" + std::to_string(1000 + id_offset + i);
    s.listener_id = listener_id;
    s.audio_path = "none.wav";
    s.score = Score(static_cast<double>((i * 13) % 101));
    pool.push_back(std::move(s));
  }
  return pool;
}

std::vector<Sample> many_listeners(int n_listeners, int per_listener) {
  std::vector<Sample> all;
  for (int l = 0; l < n_listeners; ++l) {
    auto pool = listener_pool("L" + std::to_string(100 + l), per_listener);
    all.insert(all.end(), pool.begin(), pool.end());
  }
  return all;
}

}  // namespace

TEST_CASE("manifest loading: happy path and error records") {
  const std::string dir = scratch_dir("manifest");
  const std::string path = dir + "/m.jsonl";
  {
    std::ofstream out(path);
    out << R"({"sample_id":"a1","listener_id":"L1","audio_path":"x.wav","score":55.5})"
        << "\n";
    out << R"({"sample_id":"a2","listener_id":"L1","audio_path":"y.wav","score":-1,"level":71.5})"
        << "\n";
    out << R"({"sample_id":"a3","listener_id":"L2","audio_path":"z.wav","score":0,"audiogram":{"500":35,"1000":40,"2000":55}})"
        << "\n";
  }
  std::vector<Sample> samples = load_manifest(path);
  REQUIRE(samples.size() == 3);
  CHECK(samples[0].score.value == 55.5);
  CHECK_FALSE(samples[1].score.is_known());
  CHECK(samples[1].original_level_db_spl == 71.5);
  REQUIRE(samples[2].audiogram.has_value());
  CHECK(samples[2].audiogram->thresholds.at(1000) == 40.0);

  SUBCASE("score out of range") {
    std::ofstream(path, std::ios::app)
        << R"({"sample_id":"a4","listener_id":"L2","audio_path":"w.wav","score":101})"
        << "\n";
    CHECK_THROWS_AS((void)load_manifest(path), FormatError);
  }
  SUBCASE("duplicate sample id") {
    std::ofstream(path, std::ios::app)
        << R"({"sample_id":"a1","listener_id":"L9","audio_path":"w.wav","score":10})"
        << "\n";
    CHECK_THROWS_AS((void)load_manifest(path), DuplicateId);
  }
  SUBCASE("unparseable line") {
    std::ofstream(path, std::ios::app) << "not json\n";
    CHECK_THROWS_AS((void)load_manifest(path), FormatError);
  }
  SUBCASE("save/load round trip preserves every field") {
    save_manifest(dir + "/copy.jsonl", samples);
    std::vector<Sample> again = load_manifest(dir + "/copy.jsonl");
    REQUIRE(again.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      CHECK(again[i].sample_id == samples[i].sample_id);
      CHECK(again[i].listener_id == samples[i].listener_id);
      CHECK(again[i].score.value == samples[i].score.value);
      CHECK((again[i].audiogram.has_value() ==
             samples[i].audiogram.has_value()));
    }
  }
}

TEST_CASE("fold specs over 31 listeners use the 23/3/5 structure") {
  std::vector<Sample> samples = many_listeners(31, 2);
  std::vector<SplitSpec> folds = make_fold_specs(samples);
  REQUIRE(folds.size() == 3);
  std::set<std::string> tested_listeners;
  for (const SplitSpec& fold : folds) {
    CHECK(fold.train_listeners.size() == 23);
    CHECK(fold.val_listeners.size() == 3);
    CHECK(fold.test_listeners.size() == 5);
    CHECK_NOTHROW(fold.validate());
    tested_listeners.insert(fold.test_listeners.begin(),
                            fold.test_listeners.end());
  }
  // Rotation: the three folds hold out different listeners.
  CHECK(tested_listeners.size() == 15);
}

TEST_CASE("small listener sets still produce valid folds") {
  std::vector<Sample> samples = many_listeners(6, 10);
  std::vector<SplitSpec> folds = make_fold_specs(samples);
  for (const SplitSpec& fold : folds) {
    CHECK(fold.train_listeners.size() >= 1);
    CHECK(fold.val_listeners.size() >= 1);
    CHECK(fold.test_listeners.size() >= 1);
    CHECK(fold.train_listeners.size() + fold.val_listeners.size() +
              fold.test_listeners.size() ==
          6);
  }
}

TEST_CASE("split_by_listener partitions samples exactly") {
  std::vector<Sample> samples = many_listeners(31, 3);
  SplitSpec fold = make_fold_specs(samples)[0];
  SplitResult split = split_by_listener(samples, fold);
  CHECK(split.train.size() + split.val.size() + split.test.size() ==
        samples.size());
  CHECK(split.train.size() == 23 * 3);
  CHECK(split.val.size() == 3 * 3);
  CHECK(split.test.size() == 5 * 3);
  for (const Sample& s : split.test) {
    CHECK(fold.test_listeners.count(s.listener_id) == 1);
    CHECK(fold.train_listeners.count(s.listener_id) == 0);
  }

  SUBCASE("a listener outside the spec is rejected") {
    auto extra = listener_pool("L999", 1);
    samples.push_back(extra.front());
    CHECK_THROWS_AS((void)split_by_listener(samples, fold),
                    UnassignedListener);
  }
  SUBCASE("overlapping roles are rejected") {
    SplitSpec bad = fold;
    bad.val_listeners.insert(*bad.test_listeners.begin());
    CHECK_THROWS_AS((void)split_by_listener(samples, bad), FormatError);
  }
}

TEST_CASE("training batch sampling: sizes, disjointness, determinism") {
  std::vector<Sample> pool = listener_pool("L1", 130);

  SUBCASE("64 support + 64 queries at batch size 128") {
    SeededRng rng(9);
    ListenerBatch b = sample_training_batch(pool, 64, 128, rng);
    CHECK(b.support.size() == 64);
    CHECK(b.queries.size() == 64);
    CHECK(b.query_targets.size() == 64);
  }
  SUBCASE("1 support + 127 queries") {
    SeededRng rng(9);
    ListenerBatch b = sample_training_batch(pool, 1, 128, rng);
    CHECK(b.support.size() == 1);
    CHECK(b.queries.size() == 127);
  }
  SUBCASE("support and queries never share a sample") {
    SeededRng rng(10);
    for (int trial = 0; trial < 25; ++trial) {
      ListenerBatch b = sample_training_batch(pool, 16, 64, rng);
      std::set<std::string> support_ids;
      for (const Sample& s : b.support) support_ids.insert(s.sample_id);
      CHECK(support_ids.size() == b.support.size());
      for (const Sample& q : b.queries) {
        CHECK(support_ids.count(q.sample_id) == 0);
      }
    }
  }
  SUBCASE("equal seeds give equal batch sequences") {
    SeededRng a(77), b(77);
    for (int trial = 0; trial < 10; ++trial) {
      ListenerBatch ba = sample_training_batch(pool, 8, 32, a);
      ListenerBatch bb = sample_training_batch(pool, 8, 32, b);
      REQUIRE(ba.support.size() == bb.support.size());
      for (std::size_t i = 0; i < ba.support.size(); ++i) {
        CHECK(ba.support[i].sample_id == bb.support[i].sample_id);
      }
      for (std::size_t i = 0; i < ba.queries.size(); ++i) {
        CHECK(ba.queries[i].sample_id == bb.queries[i].sample_id);
      }
    }
  }
  SUBCASE("a pool smaller than the batch errors") {
    std::vector<Sample> small = listener_pool("L1", 100);
    SeededRng rng(9);
    CHECK_THROWS_AS((void)sample_training_batch(small, 64, 128, rng),
                    InsufficientSamples);
  }
  SUBCASE("bad support/batch combinations error") {
    SeededRng rng(9);
    CHECK_THROWS_AS((void)sample_training_batch(pool, 0, 128, rng), RangeError);
    CHECK_THROWS_AS((void)sample_training_batch(pool, 128, 128, rng),
                    RangeError);
  }
}

TEST_CASE("fixed eval episodes are deterministic and cover the pool") {
  std::vector<Sample> pool = listener_pool("L7", 491);

  ListenerBatch a = fixed_eval_episode(pool, 64, 12345);
  ListenerBatch b = fixed_eval_episode(pool, 64, 12345);
  CHECK(a.queries.size() == 427);
  REQUIRE(a.support.size() == b.support.size());
  for (std::size_t i = 0; i < a.support.size(); ++i) {
    CHECK(a.support[i].sample_id == b.support[i].sample_id);
  }
  for (std::size_t i = 0; i < a.queries.size(); ++i) {
    CHECK(a.queries[i].sample_id == b.queries[i].sample_id);
  }

  // Every pool sample appears exactly once, as support or as query.
  std::set<std::string> seen;
  for (const Sample& s : a.support) seen.insert(s.sample_id);
  for (const Sample& s : a.queries) {
    CHECK(seen.insert(s.sample_id).second);
  }
  CHECK(seen.size() == pool.size());

  SUBCASE("different seeds select different support sets") {
    ListenerBatch c = fixed_eval_episode(pool, 64, 54321);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.support.size(); ++i) {
      if (a.support[i].sample_id != c.support[i].sample_id) any_diff = true;
    }
    CHECK(any_diff);
  }
  SUBCASE("no queries left errors") {
    std::vector<Sample> tiny = listener_pool("L7", 64);
    CHECK_THROWS_AS((void)fixed_eval_episode(tiny, 64, 1),
                    InsufficientSamples);
  }
  SUBCASE("mixed-listener pools are rejected") {
    std::vector<Sample> mixed = pool;
    auto other = listener_pool("L8", 1);
    mixed.push_back(other.front());
    CHECK_THROWS_AS((void)fixed_eval_episode(mixed, 4, 1), FormatError);
  }
}

TEST_CASE("split files round trip") {
  const std::string dir = scratch_dir("split");
  std::vector<Sample> samples = many_listeners(31, 1);
  SplitSpec fold = make_fold_specs(samples)[1];
  save_split(dir + "/fold2.json", fold);
  SplitSpec loaded = load_split(dir + "/fold2.json");
  CHECK(loaded.fold_index == fold.fold_index);
  CHECK(loaded.train_listeners == fold.train_listeners);
  CHECK(loaded.val_listeners == fold.val_listeners);
  CHECK(loaded.test_listeners == fold.test_listeners);
}
