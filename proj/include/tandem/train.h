// include/tandem/train.h

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

#ifndef TANDEM_TRAIN_H_
#define TANDEM_TRAIN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tandem/metrics.h"
#include "tandem/policy.h"
#include "tandem/rewards.h"
#include "tandem/world.h"

namespace tandem {

// The combined verification pipeline: a trial is accepted only if both
// networks accept. Thresholds are evaluation-time artifacts; action
// sampling happens only while training.
struct TandemSystem {
  PolicyNet asv;
  PolicyNet cm;
  double asv_threshold = 0.0;
  double cm_threshold = 0.0;
};

enum class TrainMethod { kReinforce, kImSeparate, kImSame };

std::string to_string(TrainMethod method);
TrainMethod train_method_from_string(const std::string &name);

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 64;
  int epochs = 50;
  std::uint64_t seed = 0;
  RewardModel reward;
  TrainMethod method = TrainMethod::kReinforce;
  // Fraction of spoof trials per mini-batch; negative means the natural
  // proportion of the trial list. The bona fide remainder is split evenly
  // between target and nontarget trials.
  double spoof_fraction = -1.0;

  void validate() const;
};

// One (input pair, binary target) sample for cross-entropy pretraining.
struct PairSample {
  std::vector<double> a;
  std::vector<double> b;
  int target = 0;
};

// Kept as separate pools so mini-batches can be class-balanced exactly.
struct PairDataset {
  std::vector<PairSample> positives;
  std::vector<PairSample> negatives;
};

// Same-speaker (1) vs different-speaker (0) bona fide pairs from the
// train-split speakers.
PairDataset make_asv_pretrain_pairs(const World &world, int pairs_per_class,
                                    std::uint64_t seed);

// Both-bona-fide (1) vs at-least-one-spoof (0) pairs from the train-split
// speakers.
PairDataset make_cm_pretrain_pairs(const World &world, int pairs_per_class,
                                   std::uint64_t seed);

// Cross-entropy minimization with mini-batches drawn half from each label
// pool. Returns the trained network; epochs = 0 returns the input
// unchanged. Throws if either pool is empty.
PolicyNet pretrain(PolicyNet net, const PairDataset &dataset,
                   const TrainConfig &config);

// Mean BCE over a dataset at the current parameters (diagnostics/tests).
double mean_bce(const PolicyNet &net, const PairDataset &dataset);

// Per-sample REINFORCE quantities for one fixed action pair. Exposed so the
// gradient estimator can be checked by enumerating all four action pairs.
struct SampleGrad {
  Gradients asv;
  Gradients cm;
  double reward = 0.0;
  double p_tandem = 0.0;
  double weighted_log_prob = 0.0;  // log(p_tandem) * reward
};

SampleGrad reinforce_sample_grad(const TandemSystem &system, const Trial &trial,
                                 int a_asv, int a_cm,
                                 const RewardModel &reward_model);

struct EpochStats {
  double mean_reward = 0.0;
  double mean_objective = 0.0;  // mean reward-weighted log probability
  int batches = 0;
};

// One epoch of Algorithm-style tandem optimization: per mini-batch, sample
// both actions per trial, combine with logical AND, weight the tandem
// log-probability gradient by the reward, average over the batch and take
// one ascent step on all parameters of both networks. Throws on a
// non-finite accumulated objective.
EpochStats reinforce_epoch(TandemSystem *system, const TrialList &trials,
                           const RewardModel &reward_model,
                           const TrainConfig &config, Rng &rng);

// One epoch of the cross-entropy baselines. same_labels = false trains each
// network on its own ground truth (IM-separate); true trains both toward
// the tandem label (IM-same). Descent on BCE, one step per network per
// mini-batch.
EpochStats im_epoch(TandemSystem *system, const TrialList &trials,
                    const TrainConfig &config, bool same_labels, Rng &rng);

struct ScoreStats {
  double mean_abs = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  double max_abs = 0.0;
};

// Deterministic thresholded evaluation; consumes no randomness.
struct EvalRecord {
  double asv_eer = 0.0;
  double asv_eer_threshold = 0.0;
  double cm_eer = 0.0;
  double cm_eer_threshold = 0.0;
  double tdcf_norm_min = 0.0;
  double tdcf_cm_threshold = 0.0;
  double tdcf_asv_threshold = 0.0;
  double tdcf_min_raw = 0.0;
  double tdcf_normalizer = 0.0;
  // EERs with the tasks swapped: ASV scores against bona-fide/spoof labels,
  // CM scores against target/nontarget labels.
  double asv_on_cm_eer = 0.0;
  double cm_on_asv_eer = 0.0;
  ScoreStats asv_scores;
  ScoreStats cm_scores;
  TrialCounts counts;
};

// Scores one trial list with both networks. Scores are the pre-sigmoid
// logits (monotone in the accept probability, no saturation ties).
void score_trials(const TandemSystem &system, const TrialList &trials,
                  std::vector<double> *asv_scores,
                  std::vector<double> *cm_scores,
                  std::vector<TrialClass> *classes);

// ASV EER on target/nontarget, CM EER on bona fide/spoof, minimum
// normalized t-DCF with the ASV threshold re-fixed at this model's own EER,
// plus the swapped-task EERs. Pure: no sampling, identical records on
// repeated calls.
EvalRecord evaluate(const TandemSystem &system, const TrialList &trials,
                    const CostModel &cost);

// The same record computed from already-produced scores, e.g. a score file
// from an external system.
EvalRecord evaluate_scores(std::span<const double> asv_scores,
                           std::span<const double> cm_scores,
                           std::span<const TrialClass> classes,
                           const CostModel &cost);

struct EpochReport {
  int epoch = 0;  // 0 = initial model, before any tandem update
  double dev_tdcf = 0.0;
  double eval_tdcf = 0.0;
  double asv_eer = 0.0;      // eval partition
  double cm_eer = 0.0;       // eval partition
  double mean_reward = 0.0;  // NaN for epoch 0 and cross-entropy methods
  double dev_tdcf_rel_pct = 0.0;
  double eval_tdcf_rel_pct = 0.0;
  double asv_eer_rel_pct = 0.0;
  double cm_eer_rel_pct = 0.0;
  double dev_asv_eer = 0.0;
  double dev_cm_eer = 0.0;
};

struct RunResult {
  EvalRecord initial_dev;
  EvalRecord initial_eval;
  EvalRecord final_dev;
  EvalRecord final_eval;
  std::vector<EpochReport> epochs;  // epoch 0 plus one entry per epoch
  TandemSystem system;
};

// Full tandem-optimization run: initial snapshot, config.epochs epochs of
// the configured method with an evaluation after each, final records.
RunResult run_tandem(TandemSystem system, const TrialList &dev,
                     const TrialList &eval, const TrainConfig &config,
                     const CostModel &cost);

}  // namespace tandem

#endif  // TANDEM_TRAIN_H_
