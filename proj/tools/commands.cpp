// tools/commands.cpp

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

#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssip/calibration.hpp"
#include "ssip/errors.hpp"
#include "ssip/hash.hpp"
#include "ssip/metrics.hpp"
#include "ssip/plot.hpp"
#include "ssip/signal.hpp"
#include "ssip/training.hpp"
#include "ssip/wav_io.hpp"

namespace ssip::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open for hashing: " + path);
  }
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return to_hex(fnv1a64(bytes.data(), bytes.size()));
}

CalibrationCurveSet curves_or_default(const std::string& path) {
  if (path.empty()) {
    return default_curves();
  }
  return load_curves(path);
}

Audiogram audiogram_from_json(const json& j, const std::string& where) {
  auto parse_map = [&where](const json& m) {
    Audiogram a;
    for (const auto& [freq, hl] : m.items()) {
      try {
        a.thresholds[std::stoi(freq)] = hl.get<double>();
      } catch (const std::exception&) {
        throw FormatError(where + ": bad audiogram entry '" + freq + "'");
      }
    }
    return a;
  };
  if (j.contains("audiogram")) {
    return parse_map(j.at("audiogram"));
  }
  if (j.contains("audiogram_left") && j.contains("audiogram_right")) {
    // Binaural audiograms collapse to the per-frequency mean of both ears.
    Audiogram left = parse_map(j.at("audiogram_left"));
    Audiogram right = parse_map(j.at("audiogram_right"));
    Audiogram both;
    for (const auto& [freq, hl] : left.thresholds) {
      auto it = right.thresholds.find(freq);
      if (it != right.thresholds.end()) {
        both.thresholds[freq] = 0.5 * (hl + it->second);
      }
    }
    return both;
  }
  throw IncompleteAudiogram(where + ": no audiogram data");
}

SplitSpec resolve_split(const std::string& split_path,
                        const std::string& folds_dir, int fold) {
  if (!split_path.empty()) {
    return load_split(split_path);
  }
  if (folds_dir.empty()) {
    throw FormatError("need --split or --folds with --fold");
  }
  return load_split(
      (fs::path(folds_dir) / ("fold" + std::to_string(fold) + ".json"))
          .string());
}

std::string effective_features_dir(const std::string& flag_value) {
  if (!flag_value.empty()) {
    return flag_value;
  }
  const char* env = std::getenv("SSIP_FEATURE_DIR");
  return env != nullptr ? env : "";
}

std::vector<Sample> load_resolved_manifest(const std::string& path) {
  std::vector<Sample> samples = load_manifest(path);
  resolve_audio_paths(samples, path);
  return samples;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out << j.dump(2) << "\n";
}

void emit_analysis_plots(const CorrelationReport& report,
                         const std::string& out_dir) {
  std::vector<double> hl, intel, level;
  for (const auto& p : report.points) {
    hl.push_back(p.hearing_loss);
    intel.push_back(p.mean_intelligibility);
    level.push_back(p.mean_level);
  }
  write_correlation_plot(
      (fs::path(out_dir) / "intelligibility_vs_hearing_loss.svg").string(),
      hl, intel, report.fit_intelligibility, report.r_hl_intelligibility,
      "Mean intelligibility vs average hearing loss",
      "average hearing loss (dB)", "mean intelligibility (%)");
  write_correlation_plot(
      (fs::path(out_dir) / "level_vs_hearing_loss.svg").string(), hl, level,
      report.fit_level, report.r_hl_level,
      "Mean presentation level vs average hearing loss",
      "average hearing loss (dB)", "mean level (dB SPL)");
}

void emit_sweep_plots(const json& sweep, const std::string& out_dir) {
  std::vector<int> counts = sweep.at("counts").get<std::vector<int>>();
  std::vector<double> rmse_mean =
      sweep.at("rmse").at("mean").get<std::vector<double>>();
  std::optional<double> base_rmse, base_ncc;
  if (sweep.contains("baseline") && !sweep.at("baseline").is_null()) {
    base_rmse = sweep.at("baseline").at("rmse").get<double>();
    if (!sweep.at("baseline").at("ncc").is_null()) {
      base_ncc = sweep.at("baseline").at("ncc").get<double>();
    }
  }
  write_sweep_plot((fs::path(out_dir) / "sweep_rmse.svg").string(), counts,
                   rmse_mean, base_rmse, "RMSE");
  std::vector<double> ncc_mean;
  for (const auto& v : sweep.at("ncc").at("mean")) {
    ncc_mean.push_back(v.is_null() ? std::nan("") : v.get<double>());
  }
  write_sweep_plot((fs::path(out_dir) / "sweep_ncc.svg").string(), counts,
                   ncc_mean, base_ncc, "NCC");
}

}  // namespace

void cmd_prepare(const PrepareOptions& opt) {
  const fs::path input(opt.input_dir);
  const fs::path out(opt.out_dir);
  CalibrationCurveSet curves = curves_or_default(opt.curves_path);

  // Listener metadata: audiograms keyed by listener id.
  std::ifstream lin(input / "listeners.json");
  if (!lin) {
    throw IoError("cannot open " + (input / "listeners.json").string());
  }
  json listeners_json;
  try {
    lin >> listeners_json;
  } catch (const json::exception& e) {
    throw FormatError((input / "listeners.json").string() + ": " + e.what());
  }
  std::map<std::string, Audiogram> audiograms;
  for (const auto& [listener, meta] : listeners_json.items()) {
    audiograms[listener] = audiogram_from_json(meta, "listener '" + listener + "'");
  }

  fs::create_directories(out / "audio");
  fs::create_directories(out / "folds");

  std::ifstream rin(input / "records.jsonl");
  if (!rin) {
    throw IoError("cannot open " + (input / "records.jsonl").string());
  }
  std::vector<Sample> manifest;
  std::string line;
  int line_no = 0;
  while (std::getline(rin, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where =
        (input / "records.jsonl").string() + ":" + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(where + ": " + e.what());
    }

    Sample s;
    try {
      s.sample_id = rec.at("sample_id").get<std::string>();
      s.listener_id = rec.at("listener_id").get<std::string>();
      s.system_id = rec.value("system_id", std::string());
      s.audio_path = rec.at("audio_path").get<std::string>();
      s.score = Score(rec.value("score", Score::kUnknown));
    } catch (const json::exception& e) {
      throw FormatError(where + ": " + e.what());
    }

    auto ait = audiograms.find(s.listener_id);
    if (ait == audiograms.end()) {
      throw IncompleteAudiogram("record '" + s.sample_id +
                                "': no audiogram for listener '" +
                                s.listener_id + "'");
    }
    s.audiogram = ait->second;

    // Load, measure, normalize, cache.
    WavEncoding encoding;
    Waveform w =
        load_waveform((input / s.audio_path).string(), &encoding);
    const double measured_level = rms_level_db(w);
    const double original_level = rec.contains("level")
                                      ? rec.at("level").get<double>()
                                      : measured_level;
    Waveform normalized = normalize_to_spl(w, opt.target_spl);
    const std::string cached = "audio/" + s.sample_id + ".wav";
    save_waveform((out / cached).string(), normalized, encoding);

    if (s.score.is_known()) {
      const double hl = average_hearing_loss(*s.audiogram);
      s.score = calibrate_score(s.score, original_level, opt.target_spl, hl,
                                curves);
    }
    s.original_level_db_spl = original_level;
    s.audio_path = cached;
    manifest.push_back(std::move(s));
  }
  if (manifest.empty()) {
    throw EmptyInput("no records found under " + opt.input_dir);
  }

  save_manifest((out / "manifest.jsonl").string(), manifest);
  for (const SplitSpec& fold : make_fold_specs(manifest)) {
    save_split((out / "folds" /
                ("fold" + std::to_string(fold.fold_index) + ".json"))
                   .string(),
               fold);
  }
  save_curves((out / "curves.txt").string(), curves);
  std::cout << json{{"manifest", (out / "manifest.jsonl").string()},
                    {"records", manifest.size()}}
                   .dump()
            << "\n";
}

void cmd_calibrate(const CalibrateOptions& opt) {
  CalibrationCurveSet curves = curves_or_default(opt.curves_path);
  std::vector<Sample> samples = load_manifest(opt.manifest_path);
  int calibrated = 0;
  for (Sample& s : samples) {
    if (!s.score.is_known()) continue;
    if (!s.audiogram) {
      throw IncompleteAudiogram("sample '" + s.sample_id + "' has no audiogram");
    }
    if (!s.original_level_db_spl) {
      throw FormatError("sample '" + s.sample_id + "' has no level metadata");
    }
    const double hl = average_hearing_loss(*s.audiogram);
    s.score = calibrate_score(s.score, *s.original_level_db_spl,
                              opt.target_spl, hl, curves);
    ++calibrated;
  }
  save_manifest(opt.out_path, samples);
  std::cout << json{{"manifest", opt.out_path}, {"calibrated", calibrated}}
                   .dump()
            << "\n";
}

namespace {

TrainConfig load_train_config(const std::string& config_path,
                              const std::string& features_dir,
                              std::uint64_t seed_override,
                              int n_support_override) {
  TrainConfig cfg = config_path.empty() ? TrainConfig{}
                                        : TrainConfig::load(config_path);
  const std::string features = effective_features_dir(features_dir);
  if (!features.empty()) {
    cfg.model.backbone.feature_cache_dir = features;
  }
  if (seed_override != 0) {
    cfg.seed = seed_override;
  }
  if (n_support_override != 0) {
    cfg.n_support = n_support_override;
  }
  cfg.validate();
  return cfg;
}

struct FoldEvaluation {
  MetricsReport report;
  EpisodePredictions predictions;
};

/// Fixed-episode test evaluation keeping the raw predictions around so the
/// sweep can also pool queries across folds.
FoldEvaluation evaluate_on_fold(SsipNet& model, const CheckpointMeta& meta,
                                const std::vector<Sample>& test_samples,
                                int n_support, std::uint64_t seed,
                                FeatureStore& store, int fold_index) {
  verify_no_listener_overlap(meta.train_listeners, test_samples);
  FoldEvaluation out;
  out.predictions =
      predict_fixed_episodes(model, test_samples, n_support, seed, store);
  out.report = metrics_from_predictions(out.predictions, fold_index);
  return out;
}

/// Trains on the fold (or reuses an existing checkpoint at ckpt_path) and
/// evaluates on its test listeners.
FoldEvaluation train_or_load_and_evaluate(const TrainConfig& cfg,
                                          const std::vector<Sample>& samples,
                                          const SplitSpec& fold,
                                          const std::string& ckpt_path) {
  SplitResult split = split_by_listener(samples, fold);
  if (!ckpt_path.empty() && fs::exists(ckpt_path)) {
    LoadedCheckpoint ckpt = load_checkpoint(ckpt_path);
    FeatureStore store(ckpt.model.backbone());
    return evaluate_on_fold(ckpt.model, ckpt.meta, split.test, cfg.n_support,
                            cfg.seed, store, fold.fold_index);
  }
  FeatureStore store(make_backbone(cfg.model.backbone));
  TrainResult result = train(cfg, split.train, split.val, store, nullptr);
  if (!ckpt_path.empty()) {
    save_checkpoint(ckpt_path, result.model, result.meta);
  }
  return evaluate_on_fold(result.model, result.meta, split.test, cfg.n_support,
                          cfg.seed, store, fold.fold_index);
}

}  // namespace

void cmd_train(const TrainOptions& opt) {
  TrainConfig cfg = load_train_config(opt.config_path, opt.features_dir,
                                      opt.seed, opt.n_support);
  cfg.manifest_hash = file_hash_hex(opt.manifest_path);
  if (!opt.curves_path.empty()) {
    cfg.curves_hash = file_hash_hex(opt.curves_path);
  }
  std::vector<Sample> samples = load_resolved_manifest(opt.manifest_path);
  SplitSpec fold = resolve_split(opt.split_path, opt.folds_dir, opt.fold);
  SplitResult split = split_by_listener(samples, fold);

  fs::create_directories(opt.out_dir);
  std::ofstream log_file(fs::path(opt.out_dir) / "training_log.jsonl");
  FeatureStore store(make_backbone(cfg.model.backbone));
  TrainResult result = train(cfg, split.train, split.val, store, &log_file);

  const std::string ckpt_path =
      (fs::path(opt.out_dir) / "checkpoint.ssckpt").string();
  save_checkpoint(ckpt_path, result.model, result.meta);

  MetricsReport test_report =
      evaluate(result.model, result.meta.train_listeners, split.test,
               cfg.n_support, cfg.seed, store, fold.fold_index);
  test_report.save((fs::path(opt.out_dir) / "test_metrics.json").string());

  json summary;
  summary["checkpoint"] = ckpt_path;
  summary["best_epoch"] = result.meta.epoch;
  summary["val_rmse"] = result.meta.val_rmse;
  summary["test_rmse"] = test_report.rmse;
  summary["test_ncc"] =
      test_report.ncc ? json(*test_report.ncc) : json(nullptr);
  std::cout << summary.dump() << "\n";
}

void cmd_evaluate(const EvaluateOptions& opt) {
  LoadedCheckpoint ckpt = load_checkpoint(
      opt.checkpoint_path, effective_features_dir(opt.features_dir));
  std::vector<Sample> samples = load_resolved_manifest(opt.manifest_path);
  SplitSpec fold = resolve_split(opt.split_path, opt.folds_dir,
                                 opt.fold == 0 ? 1 : opt.fold);
  SplitResult split = split_by_listener(samples, fold);

  const int n_support = opt.n_support != 0 ? opt.n_support : ckpt.meta.n_support;
  const std::uint64_t seed = opt.seed != 0 ? opt.seed : ckpt.meta.seed;
  FeatureStore store(ckpt.model.backbone());
  MetricsReport report =
      evaluate(ckpt.model, ckpt.meta.train_listeners, split.test, n_support,
               seed, store, fold.fold_index);
  if (!opt.out_path.empty()) {
    report.save(opt.out_path);
  }
  std::cout << report.to_json().dump() << "\n";
}

void cmd_predict(const PredictOptions& opt) {
  LoadedCheckpoint ckpt = load_checkpoint(
      opt.checkpoint_path, effective_features_dir(opt.features_dir));
  std::vector<Sample> samples = load_resolved_manifest(opt.manifest_path);
  if (!opt.split_path.empty()) {
    SplitSpec fold = load_split(opt.split_path);
    std::vector<Sample> subset;
    for (const Sample& s : samples) {
      if (fold.test_listeners.count(s.listener_id)) {
        subset.push_back(s);
      }
    }
    samples = std::move(subset);
  }
  if (samples.empty()) {
    throw EmptyInput("no samples selected for prediction");
  }
  const int n_support = opt.n_support != 0 ? opt.n_support : ckpt.meta.n_support;
  const std::uint64_t seed = opt.seed != 0 ? opt.seed : ckpt.meta.seed;
  FeatureStore store(ckpt.model.backbone());
  EpisodePredictions ep =
      predict_fixed_episodes(ckpt.model, samples, n_support, seed, store);
  save_predictions(opt.out_path, ep);
  std::cout << json{{"predictions", opt.out_path},
                    {"n_queries", ep.predictions.size()}}
                   .dump()
            << "\n";
}

namespace {

/// Per-count accumulator over folds. The fold-average NCC is ambiguous
/// between "mean of fold NCCs" and "NCC pooled over every fold's queries",
/// so both aggregations are emitted.
struct SweepAccumulator {
  std::vector<double> fold_rmse;
  std::vector<std::optional<double>> fold_ncc;
  std::vector<double> pooled_pred;
  std::vector<double> pooled_truth;

  void add(const FoldEvaluation& eval) {
    fold_rmse.push_back(eval.report.rmse);
    fold_ncc.push_back(eval.report.ncc);
    for (std::size_t i = 0; i < eval.predictions.predictions.size(); ++i) {
      pooled_pred.push_back(eval.predictions.predictions[i].reported_score);
      pooled_truth.push_back(eval.predictions.targets[i].known_value());
    }
  }

  double mean_rmse() const {
    double acc = 0.0;
    for (double v : fold_rmse) acc += v;
    return acc / fold_rmse.size();
  }
  json mean_ncc() const {
    double acc = 0.0;
    int n = 0;
    for (const auto& v : fold_ncc) {
      if (v) {
        acc += *v;
        ++n;
      }
    }
    return n > 0 ? json(acc / n) : json(nullptr);
  }
  double pooled_rmse() const { return rmse(pooled_pred, pooled_truth); }
  json pooled_ncc() const {
    auto v = pooled_pred.size() >= 2 ? ncc(pooled_pred, pooled_truth)
                                     : std::nullopt;
    return v ? json(*v) : json(nullptr);
  }
};

}  // namespace

void cmd_sweep(const SweepOptions& opt) {
  TrainConfig base = load_train_config(opt.config_path, opt.features_dir, 0, 0);
  std::vector<Sample> samples = load_resolved_manifest(opt.manifest_path);
  fs::create_directories(opt.out_dir);

  std::vector<int> counts = opt.counts;
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  if (counts.empty() || counts.front() < 1) {
    throw RangeError("sweep support counts must be positive");
  }

  std::vector<SweepAccumulator> by_count(counts.size());
  SweepAccumulator baseline;
  json per_fold_rmse = json::object();
  json per_fold_ncc = json::object();

  for (int fold_index : opt.folds) {
    SplitSpec fold = resolve_split("", opt.folds_dir, fold_index);
    const std::string fold_key = "fold" + std::to_string(fold_index);
    json fold_rmse = json::array();
    json fold_ncc = json::array();

    for (std::size_t ci = 0; ci < counts.size(); ++ci) {
      const int n = counts[ci];
      TrainConfig cfg = base;
      cfg.n_support = n;
      if (cfg.batch_size <= n) {
        cfg.batch_size = 2 * n;  // keep at least as many queries as supports
      }
      const std::string ckpt_path =
          (fs::path(opt.out_dir) /
           ("ckpt_" + fold_key + "_n" + std::to_string(n) + ".ssckpt"))
              .string();
      FoldEvaluation eval =
          train_or_load_and_evaluate(cfg, samples, fold, ckpt_path);
      fold_rmse.push_back(eval.report.rmse);
      fold_ncc.push_back(eval.report.ncc ? json(*eval.report.ncc)
                                         : json(nullptr));
      by_count[ci].add(eval);
    }
    per_fold_rmse[fold_key] = std::move(fold_rmse);
    per_fold_ncc[fold_key] = std::move(fold_ncc);

    if (opt.with_baseline) {
      TrainConfig cfg = base;
      cfg.model.mode = PredictionMode::audiogram_baseline;
      const std::string ckpt_path =
          (fs::path(opt.out_dir) / ("ckpt_" + fold_key + "_baseline.ssckpt"))
              .string();
      baseline.add(train_or_load_and_evaluate(cfg, samples, fold, ckpt_path));
    }
  }

  json sweep;
  sweep["counts"] = counts;
  json rmse_mean = json::array();
  json rmse_pooled = json::array();
  json ncc_mean = json::array();
  json ncc_pooled = json::array();
  for (const SweepAccumulator& acc : by_count) {
    rmse_mean.push_back(acc.mean_rmse());
    rmse_pooled.push_back(acc.pooled_rmse());
    ncc_mean.push_back(acc.mean_ncc());
    ncc_pooled.push_back(acc.pooled_ncc());
  }
  sweep["rmse"] = {{"mean", std::move(rmse_mean)},
                   {"pooled", std::move(rmse_pooled)},
                   {"per_fold", std::move(per_fold_rmse)}};
  sweep["ncc"] = {{"mean", std::move(ncc_mean)},
                  {"pooled", std::move(ncc_pooled)},
                  {"per_fold", std::move(per_fold_ncc)}};
  if (opt.with_baseline) {
    sweep["baseline"] = {{"rmse", baseline.mean_rmse()},
                         {"ncc", baseline.mean_ncc()},
                         {"rmse_pooled", baseline.pooled_rmse()},
                         {"ncc_pooled", baseline.pooled_ncc()}};
  } else {
    sweep["baseline"] = nullptr;
  }

  write_json_file((fs::path(opt.out_dir) / "sweep.json").string(), sweep);
  emit_sweep_plots(sweep, opt.out_dir);
  std::cout << sweep.dump() << "\n";
}

void cmd_analyze(const AnalyzeOptions& opt) {
  std::vector<Sample> samples = load_manifest(opt.manifest_path);
  if (samples.empty()) {
    throw EmptyInput("manifest is empty: " + opt.manifest_path);
  }
  CorrelationReport report = listener_correlation_report(samples);
  fs::create_directories(opt.out_dir);
  write_json_file((fs::path(opt.out_dir) / "analysis.json").string(),
                  report.to_json());
  emit_analysis_plots(report, opt.out_dir);
  std::cout << report.to_json().dump() << "\n";
}

void cmd_plot(const PlotOptions& opt) {
  std::ifstream in(opt.input_path);
  if (!in) {
    throw IoError("cannot open " + opt.input_path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(opt.input_path + ": " + e.what());
  }
  fs::create_directories(opt.out_dir);
  if (j.contains("counts")) {
    emit_sweep_plots(j, opt.out_dir);
  } else if (j.contains("listeners")) {
    CorrelationReport report;
    for (const auto& p : j.at("listeners")) {
      CorrelationReport::ListenerPoint pt;
      pt.listener_id = p.at("listener_id").get<std::string>();
      pt.hearing_loss = p.at("hearing_loss").get<double>();
      pt.mean_intelligibility = p.at("mean_intelligibility").get<double>();
      pt.mean_level = p.at("mean_level").get<double>();
      report.points.push_back(std::move(pt));
    }
    if (!j.at("r_hl_intelligibility").is_null()) {
      report.r_hl_intelligibility = j.at("r_hl_intelligibility").get<double>();
    }
    if (!j.at("r_hl_level").is_null()) {
      report.r_hl_level = j.at("r_hl_level").get<double>();
    }
    report.fit_intelligibility = {
        j.at("fit_intelligibility").at("slope").get<double>(),
        j.at("fit_intelligibility").at("intercept").get<double>()};
    report.fit_level = {j.at("fit_level").at("slope").get<double>(),
                        j.at("fit_level").at("intercept").get<double>()};
    emit_analysis_plots(report, opt.out_dir);
  } else {
    throw FormatError(opt.input_path +
                      ": neither a sweep result nor an analysis report");
  }
}

void cmd_synth(const SynthOptions& opt) {
  write_synth_dataset(opt.config, opt.out_dir);
  std::cout << json{{"out", opt.out_dir},
                    {"listeners", opt.config.n_listeners},
                    {"samples",
                     opt.config.n_listeners * opt.config.samples_per_listener}}
                   .dump()
            << "\n";
}

void register_commands(CLI::App& app) {
  {
    auto opt = std::make_shared<PrepareOptions>();
    CLI::App* c = app.add_subcommand(
        "prepare",
        "Convert raw dataset metadata into a manifest: normalize audio "
        "levels, calibrate scores, emit fold files");
    c->add_option("--input", opt->input_dir,
                  "Directory with listeners.json, records.jsonl and audio")
        ->required();
    c->add_option("--curves", opt->curves_path,
                  "Level-intelligibility curve file (default: built-in)");
    c->add_option("--out", opt->out_dir, "Output directory")->required();
    c->add_option("--target-spl", opt->target_spl,
                  "Presentation level to normalize to (dB SPL)");
    c->callback([opt]() { cmd_prepare(*opt); });
  }
  {
    auto opt = std::make_shared<CalibrateOptions>();
    CLI::App* c = app.add_subcommand(
        "calibrate",
        "Rewrite manifest scores to a target presentation level");
    c->add_option("--manifest", opt->manifest_path, "Input manifest")
        ->required();
    c->add_option("--curves", opt->curves_path,
                  "Level-intelligibility curve file (default: built-in)");
    c->add_option("--out", opt->out_path, "Output manifest")->required();
    c->add_option("--target-spl", opt->target_spl, "Target level (dB SPL)");
    c->callback([opt]() { cmd_calibrate(*opt); });
  }
  {
    auto opt = std::make_shared<TrainOptions>();
    CLI::App* c = app.add_subcommand("train", "Train a model on one fold");
    c->add_option("--config", opt->config_path, "Training config JSON");
    c->add_option("--manifest", opt->manifest_path, "Manifest")->required();
    c->add_option("--split", opt->split_path, "Fold split file");
    c->add_option("--folds", opt->folds_dir, "Directory of foldN.json files");
    c->add_option("--fold", opt->fold, "Fold index (with --folds)");
    c->add_option("--out", opt->out_dir, "Output directory")->required();
    c->add_option("--features", opt->features_dir,
                  "Foundation feature cache directory (or SSIP_FEATURE_DIR)");
    c->add_option("--curves", opt->curves_path,
                  "Curve file used during preparation (hash recorded)");
    c->add_option("--seed", opt->seed, "Seed override (0 keeps the config)");
    c->add_option("--n-support", opt->n_support,
                  "Support-count override (0 keeps the config)");
    c->add_flag("--deterministic,!--no-deterministic", opt->deterministic,
                "Accepted for interface stability; runs are always "
                "deterministic");
    c->callback([opt]() { cmd_train(*opt); });
  }
  {
    auto opt = std::make_shared<EvaluateOptions>();
    CLI::App* c = app.add_subcommand(
        "evaluate", "Evaluate a checkpoint on a fold's test listeners");
    c->add_option("--checkpoint", opt->checkpoint_path, "Checkpoint file")
        ->required();
    c->add_option("--manifest", opt->manifest_path, "Manifest")->required();
    c->add_option("--split", opt->split_path, "Fold split file");
    c->add_option("--folds", opt->folds_dir, "Directory of foldN.json files");
    c->add_option("--fold", opt->fold, "Fold index (with --folds)");
    c->add_option("--out", opt->out_path, "Metrics report output path");
    c->add_option("--features", opt->features_dir,
                  "Foundation feature cache directory (or SSIP_FEATURE_DIR)");
    c->add_option("--n-support", opt->n_support,
                  "Support count (0: the checkpoint's value)");
    c->add_option("--seed", opt->seed, "Episode seed (0: the checkpoint's)");
    c->callback([opt]() { cmd_evaluate(*opt); });
  }
  {
    auto opt = std::make_shared<PredictOptions>();
    CLI::App* c = app.add_subcommand(
        "predict", "Write per-query predictions for fixed episodes");
    c->add_option("--checkpoint", opt->checkpoint_path, "Checkpoint file")
        ->required();
    c->add_option("--manifest", opt->manifest_path, "Manifest")->required();
    c->add_option("--split", opt->split_path,
                  "Optional fold file restricting to its test listeners");
    c->add_option("--out", opt->out_path, "Prediction file output path")
        ->required();
    c->add_option("--features", opt->features_dir,
                  "Foundation feature cache directory (or SSIP_FEATURE_DIR)");
    c->add_option("--n-support", opt->n_support,
                  "Support count (0: the checkpoint's value)");
    c->add_option("--seed", opt->seed, "Episode seed (0: the checkpoint's)");
    c->callback([opt]() { cmd_predict(*opt); });
  }
  {
    auto opt = std::make_shared<SweepOptions>();
    CLI::App* c = app.add_subcommand(
        "sweep-support",
        "Train and evaluate across support counts; emit table and plots");
    c->add_option("--config", opt->config_path, "Training config JSON");
    c->add_option("--manifest", opt->manifest_path, "Manifest")->required();
    c->add_option("--folds", opt->folds_dir, "Directory of foldN.json files")
        ->required();
    c->add_option("--counts", opt->counts, "Support counts to sweep");
    c->add_option("--fold-indices", opt->folds, "Folds to include");
    c->add_option("--out", opt->out_dir, "Output directory")->required();
    c->add_option("--features", opt->features_dir,
                  "Foundation feature cache directory (or SSIP_FEATURE_DIR)");
    c->add_flag("--with-baseline,!--no-baseline", opt->with_baseline,
                "Also train/evaluate the audiogram baseline reference");
    c->callback([opt]() { cmd_sweep(*opt); });
  }
  {
    auto opt = std::make_shared<AnalyzeOptions>();
    CLI::App* c = app.add_subcommand(
        "analyze",
        "Per-listener hearing-loss correlation report and scatter plots");
    c->add_option("--manifest", opt->manifest_path, "Manifest")->required();
    c->add_option("--out", opt->out_dir, "Output directory")->required();
    c->callback([opt]() { cmd_analyze(*opt); });
  }
  {
    auto opt = std::make_shared<PlotOptions>();
    CLI::App* c = app.add_subcommand(
        "plot", "Re-emit plots from a sweep.json or analysis.json");
    c->add_option("--input", opt->input_path, "Structured results file")
        ->required();
    c->add_option("--out", opt->out_dir, "Output directory")->required();
    c->callback([opt]() { cmd_plot(*opt); });
  }
  {
    auto opt = std::make_shared<SynthOptions>();
    CLI::App* c = app.add_subcommand(
        "synth", "Generate the deterministic synthetic dataset");
    c->group("");  // internal helper for tests and demos; hidden from help
    c->add_option("--out", opt->out_dir, "Output directory")->required();
    c->add_option("--listeners", opt->config.n_listeners, "Listener count");
    c->add_option("--samples-per-listener", opt->config.samples_per_listener,
                  "Clips per listener");
    c->add_option("--seed", opt->config.seed, "Generator seed");
    c->add_option("--duration", opt->config.duration_seconds,
                  "Clip duration in seconds");
    c->callback([opt]() { cmd_synth(*opt); });
  }
}

}  // namespace ssip::cli
