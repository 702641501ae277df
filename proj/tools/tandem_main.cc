// tools/tandem_main.cc

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

// Command-line front door: synthesize a world, run the tandem-optimization
// experiment grid, or score external score files (t-DCF and DET curves).

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tandem/experiment.h"

namespace {

using tandem::ExperimentConfig;

void add_config_options(CLI::App &app, ExperimentConfig &cfg) {
  app.add_option("--world.num_speakers", cfg.world.num_speakers,
                 "Number of synthetic speakers (half train, half eval)")
      ->capture_default_str();
  app.add_option("--world.embedding_dim", cfg.world.embedding_dim,
                 "Embedding dimensionality")
      ->capture_default_str();
  app.add_option("--world.speaker_spread", cfg.world.speaker_spread,
                 "Std dev between speaker means")
      ->capture_default_str();
  app.add_option("--world.utterance_noise", cfg.world.utterance_noise,
                 "Std dev of utterances around their speaker mean")
      ->capture_default_str();
  app.add_option("--world.spoof_offset", cfg.world.spoof_offset,
                 "Magnitude of the systematic spoof displacement")
      ->capture_default_str();
  app.add_option("--world.utterances_per_speaker",
                 cfg.world.utterances_per_speaker,
                 "Bona fide (and spoofed) utterances per speaker")
      ->capture_default_str();
  app.add_option("--world.seed", cfg.world.seed, "World generation seed")
      ->capture_default_str();

  app.add_option("--asv.encoder", cfg.asv_spec.encoder,
                 "ASV encoder layer widths")
      ->capture_default_str();
  app.add_option("--asv.head", cfg.asv_spec.head,
                 "ASV head layer widths (last must be 1)")
      ->capture_default_str();
  app.add_option("--cm.encoder", cfg.cm_spec.encoder,
                 "CM encoder layer widths")
      ->capture_default_str();
  app.add_option("--cm.head", cfg.cm_spec.head,
                 "CM head layer widths (last must be 1)")
      ->capture_default_str();

  app.add_option("--pretrain.learning_rate", cfg.pretrain.learning_rate,
                 "Pretraining SGD learning rate")
      ->capture_default_str();
  app.add_option("--pretrain.batch_size", cfg.pretrain.batch_size,
                 "Pretraining mini-batch size")
      ->capture_default_str();
  app.add_option("--pretrain.epochs", cfg.pretrain.epochs,
                 "Pretraining epochs")
      ->capture_default_str();

  app.add_option("--tandem.learning_rate", cfg.tandem.learning_rate,
                 "Tandem-phase SGD learning rate")
      ->capture_default_str();
  app.add_option("--tandem.batch_size", cfg.tandem.batch_size,
                 "Tandem-phase mini-batch size")
      ->capture_default_str();
  app.add_option("--tandem.epochs", cfg.tandem.epochs, "Tandem-phase epochs")
      ->capture_default_str();
  app.add_option("--tandem.spoof_fraction", cfg.tandem.spoof_fraction,
                 "Spoof fraction per mini-batch; negative = natural "
                 "proportion of the trial list")
      ->capture_default_str();

  app.add_option("--cost.c_miss", cfg.cost.c_miss, "Cost of a target miss")
      ->capture_default_str();
  app.add_option("--cost.c_fa", cfg.cost.c_fa,
                 "Cost of a nontarget false alarm")
      ->capture_default_str();
  app.add_option("--cost.c_fa_spoof", cfg.cost.c_fa_spoof,
                 "Cost of accepting a spoof")
      ->capture_default_str();
  app.add_option("--cost.rho_tar", cfg.cost.rho_tar, "Target prior")
      ->capture_default_str();
  app.add_option("--cost.rho_non", cfg.cost.rho_non, "Nontarget prior")
      ->capture_default_str();
  app.add_option("--cost.rho_spoof", cfg.cost.rho_spoof, "Spoof prior")
      ->capture_default_str();

  app.add_option("--trials.train_targets", cfg.trials.train.targets)
      ->capture_default_str()->group("");
  app.add_option("--trials.train_nontargets", cfg.trials.train.nontargets)
      ->capture_default_str()->group("");
  app.add_option("--trials.train_spoofs", cfg.trials.train.spoofs)
      ->capture_default_str()->group("");
  app.add_option("--trials.dev_targets", cfg.trials.dev.targets,
                 "Dev-list target trials")
      ->capture_default_str();
  app.add_option("--trials.dev_nontargets", cfg.trials.dev.nontargets,
                 "Dev-list nontarget trials")
      ->capture_default_str();
  app.add_option("--trials.dev_spoofs", cfg.trials.dev.spoofs,
                 "Dev-list spoof trials")
      ->capture_default_str();
  app.add_option("--trials.eval_targets", cfg.trials.eval.targets,
                 "Eval-list target trials")
      ->capture_default_str();
  app.add_option("--trials.eval_nontargets", cfg.trials.eval.nontargets,
                 "Eval-list nontarget trials")
      ->capture_default_str();
  app.add_option("--trials.eval_spoofs", cfg.trials.eval.spoofs,
                 "Eval-list spoof trials")
      ->capture_default_str();
  app.add_option("--trials.seed", cfg.trials.seed, "Trial sampling seed")
      ->capture_default_str();

  app.add_option("--pretrain_pairs", cfg.pretrain_pairs,
                 "Pretraining pairs per label class")
      ->capture_default_str();
  app.add_option("--repetitions", cfg.repetitions,
                 "Independent repetitions of every method")
      ->capture_default_str();
  app.add_option("--seed", cfg.base_seed,
                 "Base seed; repetition r uses seed base+r")
      ->capture_default_str();
}

// --method/--reward narrow the configured method grid.
void apply_method_filter(ExperimentConfig &cfg, const std::string &method,
                         const std::string &reward) {
  using tandem::MethodSpec;
  using tandem::RewardKind;
  using tandem::TrainMethod;
  if (method.empty() && reward.empty()) return;
  std::vector<MethodSpec> methods;
  if (!method.empty() &&
      tandem::train_method_from_string(method) != TrainMethod::kReinforce) {
    methods.push_back({tandem::train_method_from_string(method),
                       RewardKind::kSimple});
  } else if (!reward.empty()) {
    methods.push_back({TrainMethod::kReinforce,
                       tandem::reward_kind_from_string(reward)});
  } else {
    for (RewardKind kind : {RewardKind::kSimple, RewardKind::kReward,
                            RewardKind::kPenalize, RewardKind::kTDcf}) {
      methods.push_back({TrainMethod::kReinforce, kind});
    }
  }
  cfg.methods = std::move(methods);
}

std::filesystem::path apply_out_root(const std::filesystem::path &dir) {
  const char *root = std::getenv("TANDEM_OUT_ROOT");
  if (root != nullptr && *root != '\0' && dir.is_relative()) {
    return std::filesystem::path(root) / dir;
  }
  return dir;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Tandem ASV+CM training and t-DCF evaluation toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; flags override its values");

  ExperimentConfig cfg;
  add_config_options(app, cfg);

  std::string out_dir = "out";
  app.add_option("-o,--out", out_dir,
                 "Output directory (prefixed by $TANDEM_OUT_ROOT when "
                 "relative)")
      ->capture_default_str();

  CLI::App *synth = app.add_subcommand(
      "synth", "Generate the synthetic world and write protocol files");

  CLI::App *run = app.add_subcommand(
      "run", "Pretrain, tandem-optimize and evaluate the configured methods");
  std::string method_flag, reward_flag;
  run->add_option("--method", method_flag,
                  "Restrict to one method: reinforce, im-separate, im-same")
      ->check(CLI::IsMember({"reinforce", "im-separate", "im-same"}));
  run->add_option("--reward", reward_flag,
                  "Restrict REINFORCE to one reward: simple, reward, "
                  "penalize, tdcf")
      ->check(CLI::IsMember({"simple", "reward", "penalize", "tdcf"}));

  CLI::App *tdcf = app.add_subcommand(
      "tdcf", "Evaluate a score file: EERs and minimum normalized t-DCF");
  std::string tdcf_file;
  std::string tdcf_report;
  tdcf->add_option("score_file", tdcf_file, "Score file to evaluate")
      ->required();
  tdcf->add_option("--report", tdcf_report,
                   "JSON report path (default: <score_file>.tdcf.json)");

  CLI::App *det = app.add_subcommand(
      "det", "Write DET curve CSVs for the systems in a score file");
  std::string det_file;
  std::string det_system = "both";
  det->add_option("score_file", det_file, "Score file to evaluate")
      ->required();
  det->add_option("--system", det_system, "Which system: asv, cm or both")
      ->check(CLI::IsMember({"asv", "cm", "both"}));

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.output_dir = apply_out_root(out_dir);
    if (synth->parsed()) {
      tandem::cmd_synth(cfg, std::cout);
      return 0;
    }
    if (run->parsed()) {
      apply_method_filter(cfg, method_flag, reward_flag);
      const tandem::ExperimentResult result =
          tandem::run_experiment(cfg, std::cout);
      return result.any_failure ? 1 : 0;
    }
    if (tdcf->parsed()) {
      const std::filesystem::path report =
          tdcf_report.empty() ? std::filesystem::path(tdcf_file + ".tdcf.json")
                              : std::filesystem::path(tdcf_report);
      tandem::cmd_tdcf(tdcf_file, cfg.cost, report, std::cout);
      return 0;
    }
    if (det->parsed()) {
      for (const std::filesystem::path &path :
           tandem::cmd_det(det_file, det_system, cfg.output_dir)) {
        std::cout << "wrote " << path.string() << "\n";
      }
      return 0;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
