// tools/commands.hpp

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

#ifndef SSIP_TOOLS_COMMANDS_HPP_
#define SSIP_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ssip/synth.hpp"

namespace CLI {
class App;
}

namespace ssip::cli {

struct PrepareOptions {
  std::string input_dir;
  std::string curves_path;  // empty: built-in defaults
  std::string out_dir;
  double target_spl = 65.0;
};
void cmd_prepare(const PrepareOptions& opt);

struct CalibrateOptions {
  std::string manifest_path;
  std::string curves_path;  // empty: built-in defaults
  std::string out_path;
  double target_spl = 65.0;
};
void cmd_calibrate(const CalibrateOptions& opt);

struct TrainOptions {
  std::string config_path;
  std::string manifest_path;
  std::string split_path;   // explicit fold file, or:
  std::string folds_dir;    // folds dir + fold index
  int fold = 1;
  std::string out_dir;
  std::string features_dir;  // foundation feature cache override
  std::string curves_path;   // recorded as provenance hash only
  std::uint64_t seed = 0;    // 0: keep the config's seed
  int n_support = 0;         // 0: keep the config's n_support
  bool deterministic = true; // accepted for interface stability; runs are
                             // always deterministic in this implementation
};
void cmd_train(const TrainOptions& opt);

struct EvaluateOptions {
  std::string checkpoint_path;
  std::string manifest_path;
  std::string split_path;
  std::string folds_dir;
  int fold = 0;  // 0: take the fold index from the split file
  std::string out_path;
  std::string features_dir;
  int n_support = 0;      // 0: the checkpoint's training value
  std::uint64_t seed = 0; // 0: the checkpoint's seed
};
void cmd_evaluate(const EvaluateOptions& opt);

struct PredictOptions {
  std::string checkpoint_path;
  std::string manifest_path;
  std::string split_path;  // optional; restricts to the fold's test listeners
  std::string out_path;
  std::string features_dir;
  int n_support = 0;
  std::uint64_t seed = 0;
};
void cmd_predict(const PredictOptions& opt);

struct SweepOptions {
  std::string config_path;
  std::string manifest_path;
  std::string folds_dir;
  std::vector<int> counts = {1, 2, 4, 8, 16, 32, 64};
  std::vector<int> folds = {1, 2, 3};
  std::string out_dir;
  std::string features_dir;
  bool with_baseline = true;
};
void cmd_sweep(const SweepOptions& opt);

struct AnalyzeOptions {
  std::string manifest_path;
  std::string out_dir;
};
void cmd_analyze(const AnalyzeOptions& opt);

struct PlotOptions {
  std::string input_path;  // analysis.json or sweep.json
  std::string out_dir;
};
void cmd_plot(const PlotOptions& opt);

struct SynthOptions {
  std::string out_dir;
  SynthConfig config;
};
void cmd_synth(const SynthOptions& opt);

void register_commands(CLI::App& app);

}  // namespace ssip::cli

#endif  // SSIP_TOOLS_COMMANDS_HPP_
