// src/dataset.cpp

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

#include "ssip/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "json.hpp"
#include "ssip/errors.hpp"
#include "ssip/hash.hpp"

namespace ssip {

using nlohmann::json;

namespace {

Sample sample_from_json(const json& j, const std::string& where) {
  Sample s;
  try {
    s.sample_id = j.at("sample_id").get<std::string>();
    s.listener_id = j.at("listener_id").get<std::string>();
    s.system_id = j.value("system_id", std::string());
    s.audio_path = j.at("audio_path").get<std::string>();
    s.score = Score(j.value("score", Score::kUnknown));
    if (j.contains("audiogram")) {
      Audiogram a;
      for (const auto& [freq, hl] : j.at("audiogram").items()) {
        a.thresholds[std::stoi(freq)] = hl.get<double>();
      }
      s.audiogram = std::move(a);
    }
    if (j.contains("level")) {
      s.original_level_db_spl = j.at("level").get<double>();
    }
    if (j.contains("folds")) {
      for (const auto& f : j.at("folds")) {
        s.fold_tags.insert(f.get<int>());
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(where + ": " + e.what());
  }
  if (s.sample_id.empty() || s.listener_id.empty()) {
    throw FormatError(where + ": empty sample_id or listener_id");
  }
  if (!s.score.is_valid()) {
    throw FormatError(where + ": score " + std::to_string(s.score.value) +
                      " outside [0, 100]");
  }
  return s;
}

json sample_to_json(const Sample& s) {
  json j;
  j["sample_id"] = s.sample_id;
  j["listener_id"] = s.listener_id;
  if (!s.system_id.empty()) j["system_id"] = s.system_id;
  j["audio_path"] = s.audio_path;
  j["score"] = s.score.value;
  if (s.audiogram) {
    json a = json::object();
    for (const auto& [freq, hl] : s.audiogram->thresholds) {
      a[std::to_string(freq)] = hl;
    }
    j["audiogram"] = std::move(a);
  }
  if (s.original_level_db_spl) j["level"] = *s.original_level_db_spl;
  if (!s.fold_tags.empty()) j["folds"] = s.fold_tags;
  return j;
}

std::set<std::string> string_set(const json& j, const char* key) {
  std::set<std::string> out;
  for (const auto& v : j.at(key)) {
    out.insert(v.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<Sample> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open manifest: " + path);
  }
  std::vector<Sample> samples;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(where + ": " + e.what());
    }
    Sample s = sample_from_json(j, where);
    if (!seen_ids.insert(s.sample_id).second) {
      throw DuplicateId(where + ": duplicate sample_id '" + s.sample_id + "'");
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

void save_manifest(const std::string& path,
                   const std::vector<Sample>& samples) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  for (const auto& s : samples) {
    out << sample_to_json(s).dump() << "\n";
  }
  if (!out) {
    throw IoError("short write to " + path);
  }
}

void SplitSpec::validate() const {
  for (const auto& l : train_listeners) {
    if (val_listeners.count(l) || test_listeners.count(l)) {
      throw FormatError("listener '" + l + "' assigned to multiple roles");
    }
  }
  for (const auto& l : val_listeners) {
    if (test_listeners.count(l)) {
      throw FormatError("listener '" + l + "' assigned to multiple roles");
    }
  }
}

SplitSpec load_split(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open split spec: " + path);
  }
  json j;
  try {
    in >> j;
    SplitSpec spec;
    spec.fold_index = j.at("fold_index").get<int>();
    spec.train_listeners = string_set(j, "train_listeners");
    spec.val_listeners = string_set(j, "val_listeners");
    spec.test_listeners = string_set(j, "test_listeners");
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void save_split(const std::string& path, const SplitSpec& spec) {
  spec.validate();
  json j;
  j["fold_index"] = spec.fold_index;
  j["train_listeners"] = spec.train_listeners;
  j["val_listeners"] = spec.val_listeners;
  j["test_listeners"] = spec.test_listeners;
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out << j.dump(2) << "\n";
}

std::vector<SplitSpec> make_fold_specs(const std::vector<Sample>& samples) {
  std::set<std::string> listener_set;
  for (const auto& s : samples) {
    listener_set.insert(s.listener_id);
  }
  std::vector<std::string> listeners(listener_set.begin(), listener_set.end());
  const int n = static_cast<int>(listeners.size());
  if (n < 3) {
    throw InsufficientSamples("need at least 3 listeners to build folds, got " +
                              std::to_string(n));
  }

  // Role sizes follow the 23/3/5 reference split (exact at 31 listeners,
  // proportional otherwise, at least one listener per role).
  int n_test = std::max(1, static_cast<int>(std::lround(n * 5.0 / 31.0)));
  int n_val = std::max(1, static_cast<int>(std::lround(n * 3.0 / 31.0)));
  while (n - n_test - n_val < 1) {
    if (n_test > 1) {
      --n_test;
    } else {
      --n_val;
    }
  }

  std::vector<SplitSpec> folds;
  for (int fold = 0; fold < 3; ++fold) {
    SplitSpec spec;
    spec.fold_index = fold + 1;
    // Rotate the held-out window so the three folds test different listeners.
    const int offset = fold * (n_test + n_val);
    for (int i = 0; i < n; ++i) {
      const std::string& l = listeners[(offset + i) % n];
      if (i < n_test) {
        spec.test_listeners.insert(l);
      } else if (i < n_test + n_val) {
        spec.val_listeners.insert(l);
      } else {
        spec.train_listeners.insert(l);
      }
    }
    spec.validate();
    folds.push_back(std::move(spec));
  }
  return folds;
}

SplitResult split_by_listener(const std::vector<Sample>& samples,
                              const SplitSpec& spec) {
  spec.validate();
  SplitResult out;
  for (const auto& s : samples) {
    if (spec.train_listeners.count(s.listener_id)) {
      out.train.push_back(s);
    } else if (spec.val_listeners.count(s.listener_id)) {
      out.val.push_back(s);
    } else if (spec.test_listeners.count(s.listener_id)) {
      out.test.push_back(s);
    } else {
      throw UnassignedListener("listener '" + s.listener_id +
                               "' is not covered by fold " +
                               std::to_string(spec.fold_index));
    }
  }
  return out;
}

namespace {

ListenerBatch make_episode(const std::vector<Sample>& pool,
                           const std::vector<std::size_t>& order,
                           int n_support, std::size_t n_queries) {
  ListenerBatch batch;
  batch.listener_id = pool.front().listener_id;
  for (int i = 0; i < n_support; ++i) {
    const Sample& s = pool[order[static_cast<std::size_t>(i)]];
    if (!s.score.is_known()) {
      throw UnknownScore("support sample '" + s.sample_id +
                         "' has no ground-truth score");
    }
    batch.support.push_back(s);
  }
  for (std::size_t i = 0; i < n_queries; ++i) {
    const Sample& s = pool[order[static_cast<std::size_t>(n_support) + i]];
    batch.queries.push_back(s);
    batch.query_targets.push_back(s.score);
  }
  return batch;
}

void check_single_listener(const std::vector<Sample>& pool) {
  for (const auto& s : pool) {
    if (s.listener_id != pool.front().listener_id) {
      throw FormatError("episode pool mixes listeners '" +
                        pool.front().listener_id + "' and '" + s.listener_id +
                        "'");
    }
  }
}

}  // namespace

ListenerBatch sample_training_batch(const std::vector<Sample>& pool,
                                    int n_support, int batch_size,
                                    SeededRng& rng) {
  if (n_support < 1 || n_support >= batch_size) {
    throw RangeError("need 1 <= n_support < batch_size, got n_support=" +
                     std::to_string(n_support) + " batch_size=" +
                     std::to_string(batch_size));
  }
  if (static_cast<int>(pool.size()) < batch_size) {
    throw InsufficientSamples("listener pool has " +
                              std::to_string(pool.size()) +
                              " samples, batch size is " +
                              std::to_string(batch_size));
  }
  check_single_listener(pool);
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) order[i] = i;
  rng.shuffle(order);
  return make_episode(pool, order, n_support,
                      static_cast<std::size_t>(batch_size - n_support));
}

ListenerBatch fixed_eval_episode(const std::vector<Sample>& pool,
                                 int n_support, std::uint64_t seed) {
  if (n_support < 1) {
    throw RangeError("n_support must be >= 1");
  }
  if (static_cast<int>(pool.size()) <= n_support) {
    throw InsufficientSamples("listener pool has " +
                              std::to_string(pool.size()) +
                              " samples, no queries left after " +
                              std::to_string(n_support) + " support samples");
  }
  check_single_listener(pool);

  // Sort indices by sample_id, then apply a seed-keyed shuffle. The seed is
  // mixed with the listener id so different listeners get independent
  // support selections under one evaluation seed.
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&pool](std::size_t a, std::size_t b) {
    return pool[a].sample_id < pool[b].sample_id;
  });
  SeededRng rng(seed ^ fnv1a64(pool.front().listener_id));
  rng.shuffle(order);
  return make_episode(pool, order, n_support, pool.size() - n_support);
}

std::map<std::string, std::vector<Sample>> group_by_listener(
    const std::vector<Sample>& samples) {
  std::map<std::string, std::vector<Sample>> out;
  for (const auto& s : samples) {
    out[s.listener_id].push_back(s);
  }
  return out;
}

}  // namespace ssip
