// tests/training_test.cpp

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

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "ssip/errors.hpp"
#include "ssip/synth.hpp"
#include "ssip/training.hpp"
#include "test_util.hpp"

using namespace ssip;
using ssip::test::scratch_dir;

namespace {

TrainConfig small_train_config() {
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.learning_rate = 3e-3;
  cfg.warmup_epochs = 2;
  cfg.batch_size = 16;
  cfg.n_support = 4;
  cfg.seed = 11;
  cfg.model.fem.embed_dim = 16;
  cfg.model.fem.heads = 4;
  cfg.model.fem.ff_mult = 2;
  cfg.model.fem.dropout = 0.0;
  cfg.model.backbone.kind = BackboneConfig::Kind::toy;
  cfg.model.backbone.toy = ToyBackboneConfig{2, 8, 256, 192, 77};
  return cfg;
}

SynthConfig small_synth(int listeners = 6, int per_listener = 24) {
  SynthConfig s;
  s.n_listeners = listeners;
  s.samples_per_listener = per_listener;
  s.duration_seconds = 0.08;
  return s;
}

}  // namespace

TEST_CASE("huber_loss values match the closed form") {
  CHECK(huber_loss(5.0, 5.0, 1.0) == 0.0);
  CHECK(huber_loss(5.5, 5.0, 1.0) == doctest::Approx(0.125));
  CHECK(huber_loss(7.0, 5.0, 1.0) == doctest::Approx(1.5));
  CHECK(huber_loss(3.0, 5.0, 1.0) == doctest::Approx(1.5));
  CHECK(huber_loss(5.0, 5.3, 2.0) == doctest::Approx(0.5 * 0.09));
  CHECK_THROWS_AS((void)huber_loss(1.0, 0.0, 0.0), RangeError);
}

TEST_CASE("huber_loss is non-negative, even, and increasing in |error|") {
  SeededRng rng(201);
  for (int trial = 0; trial < 200; ++trial) {
    const double delta = rng.uniform(0.1, 3.0);
    const double e = rng.uniform(0.0, 6.0);
    const double v = huber_loss(e, 0.0, delta);
    CHECK(v >= 0.0);
    CHECK(huber_loss(-e, 0.0, delta) == v);          // even
    CHECK(huber_loss(e + 0.01, 0.0, delta) > v);     // strictly increasing
  }
}

TEST_CASE("learning-rate schedule: warmup endpoints, cosine midpoint") {
  TrainConfig cfg;  // paper defaults: 200 epochs, lr 3e-5, warmup 10 @ 0.1
  CHECK(lr_at(0, cfg) == doctest::Approx(3e-6));
  CHECK(lr_at(10, cfg) == doctest::Approx(3e-5));
  CHECK(lr_at(105, cfg) == doctest::Approx(1.5e-5));
  // Continuity across the warmup/cosine boundary.
  CHECK(lr_at(9, cfg) == doctest::Approx(3e-5 * (0.1 + 0.9 * 0.9)));
  CHECK(lr_at(9, cfg) < lr_at(10, cfg));
  // Cosine tail approaches zero and never goes negative.
  CHECK(lr_at(199, cfg) > 0.0);
  CHECK(lr_at(199, cfg) < 1e-7);
  CHECK_THROWS_AS((void)lr_at(-1, cfg), RangeError);
  CHECK_THROWS_AS((void)lr_at(200, cfg), RangeError);
}

TEST_CASE("training loss descends on learnable synthetic data") {
  SynthDataset ds = generate_synth_dataset(small_synth());
  TrainConfig cfg = small_train_config();
  auto folds = make_fold_specs(ds.samples);
  SplitResult split = split_by_listener(ds.samples, folds[0]);

  FeatureStore store(make_backbone(cfg.model.backbone));
  inject_waveforms(ds, store);
  std::ostringstream log;
  TrainResult result = train(cfg, split.train, split.val, store, &log);

  REQUIRE(result.log.size() == 8);
  CHECK(result.log.back().mean_loss < result.log.front().mean_loss);
  CHECK(result.meta.epoch >= 0);
  CHECK(!log.str().empty());
  // One JSON line per epoch.
  int lines = 0;
  for (char c : log.str()) lines += c == '\n';
  CHECK(lines == 8);
}

TEST_CASE("an 8-sample single-listener dataset is memorized") {
  // Eight clips from one listener; train and validate on the same pool and
  // expect near-zero query error after 200 epochs.
  SynthConfig scfg = small_synth(1, 8);
  SynthDataset ds = generate_synth_dataset(scfg);
  TrainConfig cfg = small_train_config();
  cfg.epochs = 200;
  cfg.warmup_epochs = 10;
  cfg.batch_size = 8;
  cfg.n_support = 4;
  cfg.learning_rate = 5e-3;

  FeatureStore store(make_backbone(cfg.model.backbone));
  inject_waveforms(ds, store);
  TrainResult result = train(cfg, ds.samples, ds.samples, store, nullptr);
  MetricsReport report = evaluate_fixed_episodes(result.model, ds.samples,
                                                 cfg.n_support, cfg.seed, store);
  CHECK(report.rmse < 5.0);
}

TEST_CASE("equal seeds give bitwise-equal checkpoints and reports") {
  SynthDataset ds = generate_synth_dataset(small_synth());
  auto folds = make_fold_specs(ds.samples);
  SplitResult split = split_by_listener(ds.samples, folds[0]);
  TrainConfig cfg = small_train_config();
  cfg.epochs = 3;

  auto run = [&]() {
    FeatureStore store(make_backbone(cfg.model.backbone));
    inject_waveforms(ds, store);
    TrainResult r = train(cfg, split.train, split.val, store, nullptr);
    MetricsReport m = evaluate(r.model, r.meta.train_listeners, split.test,
                               cfg.n_support, cfg.seed, store, 1);
    return std::make_pair(r.model.parameter_checksum(), m);
  };
  auto [sum1, m1] = run();
  auto [sum2, m2] = run();
  CHECK(sum1 == sum2);
  CHECK(m1.rmse == m2.rmse);
  CHECK(m1.ncc == m2.ncc);
  CHECK(m1.to_json() == m2.to_json());
}

TEST_CASE("checkpoints round trip bit-exactly") {
  SynthDataset ds = generate_synth_dataset(small_synth());
  auto folds = make_fold_specs(ds.samples);
  SplitResult split = split_by_listener(ds.samples, folds[0]);
  TrainConfig cfg = small_train_config();
  cfg.epochs = 2;

  FeatureStore store(make_backbone(cfg.model.backbone));
  inject_waveforms(ds, store);
  TrainResult result = train(cfg, split.train, split.val, store, nullptr);
  MetricsReport before = evaluate_fixed_episodes(result.model, split.val,
                                                 cfg.n_support, cfg.seed, store);

  const std::string path = scratch_dir("ckpt") + "/model.ssckpt";
  save_checkpoint(path, result.model, result.meta);
  LoadedCheckpoint loaded = load_checkpoint(path);

  CHECK(loaded.model.parameter_checksum() == result.model.parameter_checksum());
  CHECK(loaded.meta.epoch == result.meta.epoch);
  CHECK(loaded.meta.val_rmse == result.meta.val_rmse);
  CHECK(loaded.meta.train_listeners == result.meta.train_listeners);

  FeatureStore store2(loaded.model.backbone());
  inject_waveforms(ds, store2);
  MetricsReport after = evaluate_fixed_episodes(loaded.model, split.val,
                                                cfg.n_support, cfg.seed, store2);
  CHECK(after.rmse == before.rmse);  // bit-exact reproduction
  CHECK(after.ncc == before.ncc);
  CHECK(after.rmse == doctest::Approx(result.meta.val_rmse));
}

TEST_CASE("evaluate refuses overlapping train/test listeners") {
  SynthDataset ds = generate_synth_dataset(small_synth());
  auto folds = make_fold_specs(ds.samples);
  SplitResult split = split_by_listener(ds.samples, folds[0]);
  TrainConfig cfg = small_train_config();
  cfg.epochs = 2;

  FeatureStore store(make_backbone(cfg.model.backbone));
  inject_waveforms(ds, store);
  TrainResult result = train(cfg, split.train, split.val, store, nullptr);

  std::set<std::string> overlapping = result.meta.train_listeners;
  overlapping.insert(split.test.front().listener_id);
  CHECK_THROWS_AS((void)evaluate(result.model, overlapping, split.test,
                                 cfg.n_support, cfg.seed, store, 1),
                  LeakageError);
}

TEST_CASE("an evaluation pass covers every test sample exactly once") {
  SynthDataset ds = generate_synth_dataset(small_synth(4, 12));
  TrainConfig cfg = small_train_config();
  SsipNet model(cfg.model);
  FeatureStore store(model.backbone());
  inject_waveforms(ds, store);

  const int n_support = 3;
  EpisodePredictions ep =
      predict_fixed_episodes(model, ds.samples, n_support, 17, store);
  // 4 listeners x 12 samples, 3 supports each: 4 * 9 queries, all distinct.
  CHECK(ep.predictions.size() == 4 * (12 - n_support));
  std::set<std::string> seen;
  for (const Prediction& p : ep.predictions) {
    CHECK(seen.insert(p.sample_id).second);
  }
}

TEST_CASE("a constant model yields the flagged undefined NCC") {
  SynthDataset ds = generate_synth_dataset(small_synth(3, 10));
  TrainConfig cfg = small_train_config();
  SsipNet model(cfg.model);
  // Zero the prediction head: every query predicts exactly the bias (0).
  for (nn::Param* p : model.all_parameters()) {
    if (p->name.rfind("spm.head", 0) == 0) p->value.fill(0.0);
  }
  FeatureStore store(model.backbone());
  inject_waveforms(ds, store);
  MetricsReport report = evaluate_fixed_episodes(model, ds.samples, 2, 9, store);
  CHECK_FALSE(report.ncc.has_value());
  CHECK(report.rmse > 0.0);
  // The flag survives serialization.
  CHECK(report.to_json().at("ncc_defined") == false);
}

TEST_CASE("audiogram-baseline mode trains and evaluates") {
  SynthDataset ds = generate_synth_dataset(small_synth());
  auto folds = make_fold_specs(ds.samples);
  SplitResult split = split_by_listener(ds.samples, folds[0]);
  TrainConfig cfg = small_train_config();
  cfg.epochs = 2;
  cfg.model.mode = PredictionMode::audiogram_baseline;

  FeatureStore store(make_backbone(cfg.model.backbone));
  inject_waveforms(ds, store);
  TrainResult result = train(cfg, split.train, split.val, store, nullptr);
  MetricsReport report = evaluate(result.model, result.meta.train_listeners,
                                  split.test, cfg.n_support, cfg.seed, store, 1);
  CHECK(report.n_queries > 0);
  CHECK(std::isfinite(report.rmse));

  SUBCASE("baseline mode requires audiograms") {
    std::vector<Sample> stripped = split.test;
    for (Sample& s : stripped) s.audiogram.reset();
    CHECK_THROWS_AS(
        (void)evaluate(result.model, result.meta.train_listeners, stripped,
                       cfg.n_support, cfg.seed, store, 1),
        IncompleteAudiogram);
  }
}

TEST_CASE("train config validation and file round trip") {
  TrainConfig cfg = small_train_config();
  CHECK_NOTHROW(cfg.validate());

  TrainConfig bad = cfg;
  bad.n_support = bad.batch_size;
  CHECK_THROWS_AS(bad.validate(), RangeError);
  bad = cfg;
  bad.huber_delta = 0.0;
  CHECK_THROWS_AS(bad.validate(), RangeError);
  bad = cfg;
  bad.warmup_epochs = bad.epochs + 1;
  CHECK_THROWS_AS(bad.validate(), RangeError);

  const std::string dir = scratch_dir("traincfg");
  {
    std::ofstream out(dir + "/cfg.json");
    out << cfg.to_json().dump(2);
  }
  TrainConfig loaded = TrainConfig::load(dir + "/cfg.json");
  CHECK(loaded.epochs == cfg.epochs);
  CHECK(loaded.learning_rate == cfg.learning_rate);
  CHECK(loaded.model.fem.embed_dim == cfg.model.fem.embed_dim);
  CHECK(loaded.model.backbone.toy.seed == cfg.model.backbone.toy.seed);
}

TEST_CASE("listeners smaller than the batch get reduced query counts") {
  // Pools of 24 against a batch size of 64: support stays exact, the query
  // count shrinks, and training still runs.
  SynthDataset ds = generate_synth_dataset(small_synth(6, 24));
  auto folds = make_fold_specs(ds.samples);
  SplitResult split = split_by_listener(ds.samples, folds[0]);
  TrainConfig cfg = small_train_config();
  cfg.epochs = 2;
  cfg.batch_size = 64;
  cfg.n_support = 4;

  FeatureStore store(make_backbone(cfg.model.backbone));
  inject_waveforms(ds, store);
  TrainResult result = train(cfg, split.train, split.val, store, nullptr);
  CHECK(result.log.size() == 2);
}

TEST_CASE("a diverging run aborts with DivergenceError") {
  SynthDataset ds = generate_synth_dataset(small_synth(3, 10));
  TrainConfig cfg = small_train_config();
  cfg.epochs = 6;
  cfg.warmup_epochs = 0;
  cfg.batch_size = 8;
  cfg.n_support = 2;
  cfg.learning_rate = 1e200;  // drives parameters to inf within a step
  cfg.grad_clip_norm = 0.0;   // clipping disabled via config
  FeatureStore store(make_backbone(cfg.model.backbone));
  inject_waveforms(ds, store);
  CHECK_THROWS_AS((void)train(cfg, ds.samples, ds.samples, store, nullptr),
                  DivergenceError);
}

TEST_CASE("training without enough samples fails fast") {
  SynthDataset ds = generate_synth_dataset(small_synth(2, 3));
  TrainConfig cfg = small_train_config();
  cfg.n_support = 4;  // no listener has more than 4 samples
  cfg.batch_size = 8;
  FeatureStore store(make_backbone(cfg.model.backbone));
  inject_waveforms(ds, store);
  CHECK_THROWS_AS(
      (void)train(cfg, ds.samples, ds.samples, store, nullptr),
      InsufficientSamples);
}
