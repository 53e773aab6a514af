// tests/fem_spm_test.cpp

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
#include <cmath>

#include "doctest.h"
#include "ssip/backbone.hpp"
#include "ssip/errors.hpp"
#include "ssip/fem.hpp"
#include "ssip/model.hpp"
#include "ssip/spm.hpp"
#include "test_util.hpp"

using namespace ssip;
using ssip::test::make_sine;
using ssip::test::random_matrix;
using ssip::test::scratch_dir;

namespace {

FemConfig small_fem() {
  FemConfig cfg;
  cfg.embed_dim = 16;
  cfg.heads = 4;
  cfg.ff_mult = 2;
  cfg.dropout = 0.0;
  return cfg;
}

nn::Param* find_param(std::vector<nn::Param*> params, const std::string& name) {
  auto it = std::find_if(params.begin(), params.end(),
                         [&name](nn::Param* p) { return p->name == name; });
  REQUIRE(it != params.end());
  return *it;
}

Embedding make_embedding(const std::string& sample_id, std::vector<double> v,
                         const std::string& listener = "L1") {
  Embedding e;
  e.sample_id = sample_id;
  e.listener_id = listener;
  e.vector = std::move(v);
  return e;
}

ModelConfig toy_model_config(int d2 = 16, PredictionMode mode = PredictionMode::ssip) {
  ModelConfig cfg;
  cfg.mode = mode;
  cfg.fem = small_fem();
  cfg.fem.embed_dim = d2;
  cfg.backbone.kind = BackboneConfig::Kind::toy;
  cfg.backbone.toy = ToyBackboneConfig{2, 8, 128, 64, 901};
  cfg.init_seed = 5;
  return cfg;
}

Sample waveform_sample(const std::string& id, const std::string& listener,
                       double score) {
  Sample s;
  s.sample_id = id;
  s.listener_id = listener;
  s.score = Score(score);
  return s;
}

}  // namespace

TEST_CASE("toy backbone: shapes, determinism, frozen checksum") {
  ToyBackbone bb;  // defaults: 4 layers, 16 channels
  Waveform w = make_sine(0.1, 500.0, 16000, 2.0);
  BackboneOutput out = bb.extract(w);
  CHECK(out.layer_count() == 4);
  CHECK(out.channel_dim() == 16);
  const int t = out.frames();
  CHECK(t > 0);
  for (const auto& m : out.layer_features) {
    CHECK(m.rows == t);
    CHECK(m.cols == 16);
    CHECK(m.all_finite());
  }

  SUBCASE("alternate configuration contract") {
    ToyBackbone small(ToyBackboneConfig{2, 8, 128, 64, 7});
    BackboneOutput o = small.extract(w);
    CHECK(o.layer_count() == 2);
    CHECK(o.channel_dim() == 8);
  }
  SUBCASE("identical input twice gives bitwise-equal features") {
    BackboneOutput again = bb.extract(w);
    for (int l = 0; l < out.layer_count(); ++l) {
      REQUIRE(again.layer_features[l].data.size() ==
              out.layer_features[l].data.size());
      for (std::size_t i = 0; i < out.layer_features[l].data.size(); ++i) {
        CHECK(again.layer_features[l].data[i] == out.layer_features[l].data[i]);
      }
    }
  }
  SUBCASE("audio shorter than one frame is degenerate") {
    Waveform stub;
    stub.sample_rate = 16000;
    stub.samples.assign(100, 0.5);
    CHECK_THROWS_AS((void)bb.extract(stub), DegenerateSignal);
  }
  SUBCASE("checksum is stable and seed dependent") {
    ToyBackbone same;
    CHECK(same.weight_checksum() == bb.weight_checksum());
    ToyBackbone other(ToyBackboneConfig{4, 16, 256, 128, 999});
    CHECK(other.weight_checksum() != bb.weight_checksum());
  }
}

TEST_CASE("feature cache files round trip and back the foundation adapter") {
  const std::string dir = scratch_dir("ssft");
  SeededRng rng(15);
  BackboneOutput bo;
  for (int l = 0; l < 3; ++l) {
    bo.layer_features.push_back(random_matrix(5, 7, rng));
  }
  write_feature_file(dir + "/clip1.ssft", bo);
  BackboneOutput back = read_feature_file(dir + "/clip1.ssft");
  REQUIRE(back.layer_count() == 3);
  REQUIRE(back.frames() == 5);
  REQUIRE(back.channel_dim() == 7);
  for (int l = 0; l < 3; ++l) {
    for (std::size_t i = 0; i < bo.layer_features[l].data.size(); ++i) {
      // float32 storage: compare at float precision
      CHECK(back.layer_features[l].data[i] ==
            doctest::Approx(bo.layer_features[l].data[i]).epsilon(1e-6));
    }
  }

  FeatureCacheBackbone fb(dir, 3, 7);
  BackboneOutput via = fb.extract(Waveform{}, "clip1");
  CHECK(via.layer_count() == 3);
  CHECK_THROWS_AS((void)fb.extract(Waveform{}, "missing"), BackboneError);

  FeatureCacheBackbone wrong(dir, 32, 1280);
  CHECK_THROWS_AS((void)wrong.extract(Waveform{}, "clip1"), BackboneError);
}

TEST_CASE("temporal_encode produces one vector per backbone layer") {
  SeededRng rng(21);
  FeatureEncoder enc(small_fem(), 4, 12, rng);

  SeededRng data(22);
  BackboneOutput bo;
  for (int l = 0; l < 4; ++l) bo.layer_features.push_back(random_matrix(6, 12, data));

  nn::Tape t;
  nn::Binder bind(t);
  std::vector<nn::Var> encoded = enc.temporal_encode(t, bind, bo);
  REQUIRE(encoded.size() == 4);
  for (nn::Var v : encoded) {
    CHECK(t.value(v).rows == 1);
    CHECK(t.value(v).cols == 16);
  }

  SUBCASE("single-frame inputs work (pooling over one frame)") {
    BackboneOutput one;
    for (int l = 0; l < 4; ++l) one.layer_features.push_back(random_matrix(1, 12, data));
    nn::Tape t2;
    nn::Binder bind2(t2);
    std::vector<nn::Var> e2 = enc.temporal_encode(t2, bind2, one);
    CHECK(t2.value(e2[0]).cols == 16);
  }
  SUBCASE("frame permutation changes the output (positional encoding)") {
    BackboneOutput permuted = bo;
    for (auto& m : permuted.layer_features) {
      // swap frames 0 and 5
      for (int j = 0; j < m.cols; ++j) std::swap(m.at(0, j), m.at(5, j));
    }
    nn::Tape t3;
    nn::Binder bind3(t3);
    std::vector<nn::Var> e3 = enc.temporal_encode(t3, bind3, permuted);
    bool any_diff = false;
    for (int j = 0; j < 16; ++j) {
      if (t3.value(e3[0]).at(0, j) != t.value(encoded[0]).at(0, j)) {
        any_diff = true;
      }
    }
    CHECK(any_diff);
  }
  SUBCASE("wrong layer count or width is rejected") {
    BackboneOutput three = bo;
    three.layer_features.pop_back();
    nn::Tape t4;
    nn::Binder bind4(t4);
    CHECK_THROWS_AS((void)enc.temporal_encode(t4, bind4, three), ShapeError);
  }
}

TEST_CASE("temporal_encode handles the full-width configuration") {
  FemConfig cfg;
  cfg.embed_dim = 384;
  cfg.heads = 8;
  cfg.ff_mult = 1;  // keep the test light
  cfg.dropout = 0.0;
  SeededRng rng(23);
  FeatureEncoder enc(cfg, 32, 1280, rng);
  SeededRng data(24);
  BackboneOutput bo;
  for (int l = 0; l < 32; ++l) {
    bo.layer_features.push_back(random_matrix(2, 1280, data, 0.2));
  }
  nn::Tape t;
  nn::Binder bind(t);
  std::vector<nn::Var> encoded = enc.temporal_encode(t, bind, bo);
  REQUIRE(encoded.size() == 32);
  for (nn::Var v : encoded) {
    CHECK(t.value(v).cols == 384);
  }
}

TEST_CASE("project_condition: score, sentinel and audiogram paths") {
  SeededRng rng(25);
  FemConfig cfg = small_fem();
  cfg.audiogram_dim = 8;
  FeatureEncoder enc(cfg, 2, 8, rng);

  SUBCASE("score 0 returns exactly the projection bias") {
    nn::Param* bias = find_param(enc.parameters(), "fem.score_proj.bias");
    for (int j = 0; j < bias->value.cols; ++j) bias->value.at(0, j) = 0.25 * j;
    nn::Tape t;
    nn::Binder bind(t);
    nn::Var v = enc.project_condition(t, bind, ConditionInput::known_score(0.0));
    for (int j = 0; j < 16; ++j) {
      CHECK(t.value(v).at(0, j) == doctest::Approx(0.25 * j));
    }
  }
  SUBCASE("the sentinel projects differently from a known score") {
    nn::Tape t;
    nn::Binder bind(t);
    nn::Var unknown = enc.project_condition(t, bind, ConditionInput::unknown_score());
    nn::Var known = enc.project_condition(t, bind, ConditionInput::known_score(1.0));
    bool any_diff = false;
    for (int j = 0; j < 16; ++j) {
      if (t.value(unknown).at(0, j) != t.value(known).at(0, j)) any_diff = true;
    }
    CHECK(any_diff);
  }
  SUBCASE("audiogram projection matches an explicit dot-product oracle") {
    std::vector<double> hl = {10, 20, 30, 40, 50, 60, 70, 80};
    nn::Tape t;
    nn::Binder bind(t);
    nn::Var v = enc.project_condition(t, bind, ConditionInput::audiogram(hl));
    const nn::Matrix& w =
        find_param(enc.parameters(), "fem.audiogram_proj.weight")->value;
    const nn::Matrix& b =
        find_param(enc.parameters(), "fem.audiogram_proj.bias")->value;
    for (int j = 0; j < 16; ++j) {
      double expected = b.at(0, j);
      for (int i = 0; i < 8; ++i) {
        expected += hl[i] / 100.0 * w.at(i, j);
      }
      CHECK(t.value(v).at(0, j) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("audiogram length mismatches are rejected") {
    nn::Tape t;
    nn::Binder bind(t);
    CHECK_THROWS_AS(
        (void)enc.project_condition(t, bind, ConditionInput::audiogram({1, 2})),
        ShapeError);
  }
}

TEST_CASE("fuse_layers wants exactly L+1 tokens") {
  SeededRng rng(27);
  FeatureEncoder enc(small_fem(), 4, 8, rng);
  nn::Tape t;
  nn::Binder bind(t);
  SeededRng data(28);
  std::vector<nn::Var> tokens;
  for (int i = 0; i < 5; ++i) tokens.push_back(t.leaf(random_matrix(1, 16, data)));

  nn::Var fused = enc.fuse_layers(t, bind, tokens);
  CHECK(t.value(fused).rows == 1);
  CHECK(t.value(fused).cols == 16);

  tokens.pop_back();
  CHECK_THROWS_AS((void)enc.fuse_layers(t, bind, tokens), ShapeError);
}

TEST_CASE("a transformer layer maps identical tokens to identical tokens") {
  // No positional encoding on the layer axis, so all-equal inputs stay
  // all-equal and pooling returns the shared row.
  SeededRng rng(29);
  nn::TransformerConfig cfg{16, 4, 2, 0.0, nn::Activation::gelu};
  nn::TransformerLayer layer("sym", cfg, rng);
  nn::Matrix row = random_matrix(1, 16, rng);
  nn::Matrix stacked(5, 16);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 16; ++j) stacked.at(i, j) = row.at(0, j);
  }
  nn::Tape t;
  nn::Binder bind(t);
  nn::Var out = layer.apply(t, bind, t.leaf(stacked));
  for (int i = 1; i < 5; ++i) {
    for (int j = 0; j < 16; ++j) {
      CHECK(t.value(out).at(i, j) ==
            doctest::Approx(t.value(out).at(0, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("embed yields a fixed-length embedding for any duration") {
  SeededRng rng(31);
  FemConfig cfg = small_fem();
  ToyBackbone bb(ToyBackboneConfig{3, 8, 256, 128, 44});
  FeatureEncoder enc(cfg, 3, 8, rng);

  Waveform short_clip = make_sine(0.1, 700.0, 16000, 0.05);
  Waveform long_clip = make_sine(0.1, 700.0, 16000, 1.0);
  Embedding e1 = enc.embed_value(bb.extract(short_clip),
                                 ConditionInput::known_score(50.0), "a", "L1");
  Embedding e2 = enc.embed_value(bb.extract(long_clip),
                                 ConditionInput::known_score(50.0), "b", "L1");
  CHECK(e1.dim() == 16);
  CHECK(e2.dim() == 16);

  SUBCASE("condition changes the embedding") {
    Embedding eq = enc.embed_value(bb.extract(short_clip),
                                   ConditionInput::unknown_score(), "a", "L1");
    bool any_diff = false;
    for (int j = 0; j < 16; ++j) {
      if (eq.vector[j] != e1.vector[j]) any_diff = true;
    }
    CHECK(any_diff);
  }
  SUBCASE("embedding is deterministic") {
    Embedding again = enc.embed_value(bb.extract(short_clip),
                                      ConditionInput::known_score(50.0), "a",
                                      "L1");
    for (int j = 0; j < 16; ++j) {
      CHECK(again.vector[j] == e1.vector[j]);
    }
  }
}

TEST_CASE("aggregate_support is an order-independent element-wise mean") {
  SupportSet s;
  s.embeddings = {make_embedding("b", {1.0, 3.0}),
                  make_embedding("a", {3.0, 5.0})};
  std::vector<double> agg = aggregate_support(s);
  REQUIRE(agg.size() == 2);
  CHECK(agg[0] == doctest::Approx(2.0));
  CHECK(agg[1] == doctest::Approx(4.0));

  SUBCASE("a single embedding aggregates to itself exactly") {
    SupportSet one;
    one.embeddings = {make_embedding("x", {0.125, -7.5, 3.25})};
    std::vector<double> a = aggregate_support(one);
    CHECK(a[0] == 0.125);
    CHECK(a[1] == -7.5);
    CHECK(a[2] == 3.25);
  }
  SUBCASE("any permutation gives a bitwise-identical aggregate") {
    SeededRng rng(33);
    SupportSet big;
    for (int i = 0; i < 64; ++i) {
      std::vector<double> v(16);
      for (auto& x : v) x = rng.normal(0.0, 1.3);
      big.embeddings.push_back(
          make_embedding("s" + std::to_string(100 + i), std::move(v)));
    }
    std::vector<double> base = aggregate_support(big);
    for (int trial = 0; trial < 10; ++trial) {
      rng.shuffle(big.embeddings);
      std::vector<double> shuffled = aggregate_support(big);
      for (std::size_t j = 0; j < base.size(); ++j) {
        CHECK(shuffled[j] == base[j]);  // bitwise
      }
    }
  }
  SUBCASE("duplicating the whole support set leaves the mean unchanged") {
    SeededRng rng(34);
    SupportSet set;
    for (int i = 0; i < 7; ++i) {
      std::vector<double> v(8);
      for (auto& x : v) x = rng.normal(0.0, 1.0);
      set.embeddings.push_back(make_embedding("s" + std::to_string(i), v));
    }
    std::vector<double> once = aggregate_support(set);
    SupportSet doubled = set;
    for (int i = 0; i < 7; ++i) doubled.embeddings.push_back(set.embeddings[i]);
    std::vector<double> twice = aggregate_support(doubled);
    for (std::size_t j = 0; j < once.size(); ++j) {
      CHECK(twice[j] == doctest::Approx(once[j]).epsilon(1e-14));
    }
  }
  SUBCASE("validation failures") {
    SupportSet empty;
    CHECK_THROWS_AS((void)aggregate_support(empty), EmptySupport);
    SupportSet mixed;
    mixed.embeddings = {make_embedding("a", {1.0}, "L1"),
                        make_embedding("b", {2.0}, "L2")};
    CHECK_THROWS_AS((void)aggregate_support(mixed), FormatError);
    SupportSet ragged;
    ragged.embeddings = {make_embedding("a", {1.0}),
                         make_embedding("b", {1.0, 2.0})};
    CHECK_THROWS_AS((void)aggregate_support(ragged), ShapeError);
  }
}

TEST_CASE("predict_query is an affine map with clamped reporting") {
  SUBCASE("zero weights and bias 50 predict 50 for every query") {
    nn::Matrix w = nn::Matrix::zeros(4, 1);
    nn::Matrix b = nn::Matrix::full(1, 1, 50.0);
    Prediction p = predict_query({1.0, -2.0}, make_embedding("q", {3.0, 4.0}),
                                 w, b);
    CHECK(p.predicted_score == doctest::Approx(50.0));
    CHECK(p.reported_score == doctest::Approx(50.0));
  }
  SUBCASE("hand-set weights match an explicit dot product") {
    nn::Matrix w(4, 1);
    w.data = {0.5, -1.0, 2.0, 0.25};
    nn::Matrix b = nn::Matrix::full(1, 1, 7.0);
    const std::vector<double> agg = {2.0, 3.0};
    Embedding q = make_embedding("q", {-1.0, 4.0});
    Prediction p = predict_query(agg, q, w, b);
    const double expected = 7.0 + 2.0 * 0.5 + 3.0 * -1.0 + -1.0 * 2.0 + 4.0 * 0.25;
    CHECK(p.predicted_score == doctest::Approx(expected));
  }
  SUBCASE("raw 112 reports as 100") {
    nn::Matrix w = nn::Matrix::zeros(2, 1);
    nn::Matrix b = nn::Matrix::full(1, 1, 112.0);
    Prediction p = predict_query({0.0}, make_embedding("q", {0.0}), w, b);
    CHECK(p.predicted_score == doctest::Approx(112.0));
    CHECK(p.reported_score == doctest::Approx(100.0));
  }
  SUBCASE("dimension mismatches are rejected") {
    nn::Matrix w = nn::Matrix::zeros(6, 1);
    nn::Matrix b = nn::Matrix::zeros(1, 1);
    CHECK_THROWS_AS(
        (void)predict_query({1.0}, make_embedding("q", {1.0, 2.0}), w, b),
        ShapeError);
  }
}

TEST_CASE("forward_batch: counts, hidden targets, permutation, any support size") {
  ModelConfig cfg = toy_model_config();
  SsipNet model(cfg);
  FeatureStore store(model.backbone());

  SeededRng rng(51);
  auto add_sample = [&](const std::string& id, double score) {
    Sample s = waveform_sample(id, "L1", score);
    Waveform w = make_sine(0.1, rng.uniform(300.0, 2500.0), 16000, 0.03,
                           rng.uniform(0.0, 6.28));
    store.put_waveform(id, std::move(w));
    return s;
  };

  ListenerBatch batch;
  batch.listener_id = "L1";
  for (int i = 0; i < 6; ++i) {
    batch.support.push_back(add_sample("sup" + std::to_string(i), 40.0 + i));
  }
  for (int i = 0; i < 4; ++i) {
    Sample q = add_sample("qry" + std::to_string(i), 60.0 + i);
    batch.queries.push_back(q);
    batch.query_targets.push_back(q.score);
  }

  std::vector<Prediction> preds = model.forward_batch(batch, store);
  REQUIRE(preds.size() == 4);
  for (const Prediction& p : preds) {
    CHECK(p.reported_score >= 0.0);
    CHECK(p.reported_score <= 100.0);
  }

  SUBCASE("mutating hidden targets changes nothing, bit for bit") {
    ListenerBatch tampered = batch;
    for (Score& t : tampered.query_targets) t = Score(1.0);
    std::vector<Prediction> again = model.forward_batch(tampered, store);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      CHECK(again[i].predicted_score == preds[i].predicted_score);
    }
  }
  SUBCASE("support permutation changes nothing, bit for bit") {
    ListenerBatch shuffled = batch;
    std::reverse(shuffled.support.begin(), shuffled.support.end());
    std::vector<Prediction> again = model.forward_batch(shuffled, store);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      CHECK(again[i].predicted_score == preds[i].predicted_score);
    }
  }
  SUBCASE("the same model accepts any support count") {
    for (int n : {1, 2, 5}) {
      ListenerBatch small = batch;
      small.support.resize(n);
      std::vector<Prediction> p = model.forward_batch(small, store);
      CHECK(p.size() == 4);
    }
  }
  SUBCASE("a single support sample still drives every query") {
    ListenerBatch one = batch;
    one.support.resize(1);
    std::vector<Prediction> p = model.forward_batch(one, store);
    CHECK(p.size() == 4);
  }
}

TEST_CASE("model configs round trip through json") {
  ModelConfig cfg = toy_model_config(24, PredictionMode::audiogram_baseline);
  cfg.fem.dropout = 0.2;
  cfg.audiogram_frequencies = {500, 1000, 2000, 4000};
  cfg.fem.audiogram_dim = 4;
  ModelConfig back = ModelConfig::from_json(cfg.to_json());
  CHECK(back.mode == PredictionMode::audiogram_baseline);
  CHECK(back.fem.embed_dim == 24);
  CHECK(back.fem.dropout == 0.2);
  CHECK(back.fem.audiogram_dim == 4);
  CHECK(back.audiogram_frequencies == cfg.audiogram_frequencies);
  CHECK(back.backbone.toy.seed == cfg.backbone.toy.seed);
}
