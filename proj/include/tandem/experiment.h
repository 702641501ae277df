// include/tandem/experiment.h

// Copyright 2026  Tandem-Reinforce Authors

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

#ifndef TANDEM_EXPERIMENT_H_
#define TANDEM_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tandem/train.h"
#include "tandem/world.h"

namespace tandem {

// One row of the result table: a training method, with the reward function
// when the method is REINFORCE.
struct MethodSpec {
  TrainMethod method = TrainMethod::kReinforce;
  RewardKind reward = RewardKind::kSimple;
};

// Stable identifier used for directories and summary keys, e.g.
// "reinforce_simple", "im_separate".
std::string method_key(const MethodSpec &spec);

// The paper-shaped grid: REINFORCE with all four reward functions plus the
// two cross-entropy baselines.
std::vector<MethodSpec> default_methods();

struct TrialPlan {
  // Class counts keep roughly the 1:9 bona-fide:spoof imbalance of the
  // ASVspoof19-style lists at one tenth of the size.
  TrialCounts train{128, 127, 2230};
  TrialCounts dev{128, 127, 2230};
  TrialCounts eval{200, 200, 3600};
  std::uint64_t seed = 11;
};

struct ExperimentConfig {
  WorldConfig world;
  LayerSpec asv_spec;
  LayerSpec cm_spec;
  TrainConfig pretrain;  // cross-entropy phase; seed derived per repetition
  TrainConfig tandem;    // tandem phase; seed derived per repetition
  CostModel cost;
  TrialPlan trials;
  int pretrain_pairs = 3000;  // per label class, per system
  int repetitions = 3;
  std::uint64_t base_seed = 100;
  std::filesystem::path output_dir = "out";
  std::vector<MethodSpec> methods = default_methods();

  ExperimentConfig();
  void validate() const;
};

// Deterministic seed-stream derivation so every stage of a repetition has
// its own independent generator.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

struct ExperimentResult {
  bool any_failure = false;
  std::filesystem::path summary_path;
};

// The full experiment: one world and fixed trial lists; per repetition,
// pretrain ASV and CM once and branch every configured method off the same
// initial system; write per-run reports, checkpoints and score files, then
// an aggregate summary.json with per-method mean/std and relative change.
// Repetition failures are recorded in the summary and do not stop the
// remaining work.
ExperimentResult run_experiment(const ExperimentConfig &config,
                                std::ostream &log);

// Writes train/dev/eval protocol files under <output_dir>/protocols.
std::vector<std::filesystem::path> cmd_synth(const ExperimentConfig &config,
                                             std::ostream &log);

// Scores an external score file: prints ASV EER, CM EER and minimum
// normalized t-DCF, and writes a JSON report next to them.
EvalRecord cmd_tdcf(const std::filesystem::path &score_file,
                    const CostModel &cost,
                    const std::filesystem::path &report_path,
                    std::ostream &log);

// Emits DET curve CSVs for the selected system(s); selector is "asv", "cm"
// or "both". Returns the written paths.
std::vector<std::filesystem::path> cmd_det(
    const std::filesystem::path &score_file, const std::string &selector,
    const std::filesystem::path &out_dir);

}  // namespace tandem

#endif  // TANDEM_EXPERIMENT_H_
