// src/train.cc

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

#include "tandem/train.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tandem {

namespace {

constexpr double kProbClamp = 1e-12;

double clamp_prob(double p) {
  return std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
}

// Draws trial indices with roughly equal target/nontarget counts and spoofs
// at the configured fraction.
class TrialSampler {
 public:
  TrialSampler(const TrialList &list, double spoof_fraction) {
    for (std::size_t i = 0; i < list.trials.size(); ++i) {
      switch (class_of(list.trials[i].truth)) {
        case TrialClass::kTarget:
          targets_.push_back(i);
          break;
        case TrialClass::kNontarget:
          nontargets_.push_back(i);
          break;
        case TrialClass::kSpoof:
          spoofs_.push_back(i);
          break;
      }
    }
    if (targets_.empty() || nontargets_.empty() || spoofs_.empty()) {
      throw std::runtime_error("class absent from trial set");
    }
    spoof_fraction_ =
        spoof_fraction >= 0.0
            ? spoof_fraction
            : static_cast<double>(spoofs_.size()) / list.trials.size();
  }

  std::size_t draw(Rng &rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < spoof_fraction_) return pick(spoofs_, rng);
    return unit(rng) < 0.5 ? pick(targets_, rng) : pick(nontargets_, rng);
  }

 private:
  static std::size_t pick(const std::vector<std::size_t> &pool, Rng &rng) {
    std::uniform_int_distribution<std::size_t> dist(0, pool.size() - 1);
    return pool[dist(rng)];
  }

  std::vector<std::size_t> targets_, nontargets_, spoofs_;
  double spoof_fraction_ = 0.0;
};

struct SampleGradInternal {
  double d_logit_asv = 0.0;
  double d_logit_cm = 0.0;
  double reward_value = 0.0;
  double p_tandem = 0.0;
  double log_p = 0.0;
};

// Logit-level derivatives of log p_tandem for a fixed action pair.
SampleGradInternal tandem_logit_grads(double p_asv, double p_cm, int a_asv,
                                      int a_cm, const RewardModel &model,
                                      const GroundTruth &truth) {
  SampleGradInternal g;
  const int a_tandem = (a_asv == 1 && a_cm == 1) ? 1 : 0;
  g.reward_value = reward(model, a_tandem, truth);
  const double joint = p_asv * p_cm;
  if (a_tandem == 1) {
    g.p_tandem = joint;
    g.log_p = std::log(clamp_prob(p_asv)) + std::log(clamp_prob(p_cm));
    g.d_logit_asv = 1.0 - p_asv;
    g.d_logit_cm = 1.0 - p_cm;
  } else {
    g.p_tandem = 1.0 - joint;
    g.log_p = std::log(clamp_prob(1.0 - joint));
    const double denom = std::max(1.0 - joint, kProbClamp);
    g.d_logit_asv = -p_cm * p_asv * (1.0 - p_asv) / denom;
    g.d_logit_cm = -p_asv * p_cm * (1.0 - p_cm) / denom;
  }
  return g;
}

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

std::string to_string(TrainMethod method) {
  switch (method) {
    case TrainMethod::kReinforce:
      return "reinforce";
    case TrainMethod::kImSeparate:
      return "im-separate";
    default:
      return "im-same";
  }
}

TrainMethod train_method_from_string(const std::string &name) {
  if (name == "reinforce") return TrainMethod::kReinforce;
  if (name == "im-separate" || name == "im_separate") {
    return TrainMethod::kImSeparate;
  }
  if (name == "im-same" || name == "im_same") return TrainMethod::kImSame;
  throw std::runtime_error("unknown training method '" + name + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) {
    throw std::runtime_error("learning rate must be positive");
  }
  if (batch_size <= 0) throw std::runtime_error("batch size must be positive");
  if (epochs < 0) throw std::runtime_error("epochs must be non-negative");
  if (spoof_fraction > 1.0) {
    throw std::runtime_error("spoof fraction must be <= 1");
  }
}

PairDataset make_asv_pretrain_pairs(const World &world, int pairs_per_class,
                                    std::uint64_t seed) {
  const std::vector<int> speakers = partition_speakers(world, Partition::kTrain);
  if (speakers.size() < 2) {
    throw std::runtime_error("pair construction needs at least two speakers");
  }
  Rng rng(seed);
  std::uniform_int_distribution<int> pick_speaker(
      0, static_cast<int>(speakers.size()) - 1);
  std::uniform_int_distribution<int> pick_utt(
      0, world.config.utterances_per_speaker - 1);

  // First input mirrors the trial-time enrollment representation: the mean
  // of a random enrollment-sized subset of the speaker's utterances, never
  // containing the paired test utterance.
  auto subset_mean = [&](int speaker, int exclude) {
    const int dim = world.config.embedding_dim;
    const int count = world.enroll_count();
    std::vector<double> mean(dim, 0.0);
    for (int n = 0; n < count; ++n) {
      int u = pick_utt(rng);
      while (u == exclude) u = pick_utt(rng);
      for (int d = 0; d < dim; ++d) mean[d] += world.bonafide[speaker][u][d];
    }
    for (double &v : mean) v /= count;
    return mean;
  };

  PairDataset dataset;
  for (int i = 0; i < pairs_per_class; ++i) {
    const int s = speakers[pick_speaker(rng)];
    const int u = pick_utt(rng);
    dataset.positives.push_back({subset_mean(s, u), world.bonafide[s][u], 1});
  }
  for (int i = 0; i < pairs_per_class; ++i) {
    const int a = pick_speaker(rng);
    int b = pick_speaker(rng);
    while (b == a) b = pick_speaker(rng);
    dataset.negatives.push_back({subset_mean(speakers[a], -1),
                                 world.bonafide[speakers[b]][pick_utt(rng)],
                                 0});
  }
  return dataset;
}

PairDataset make_cm_pretrain_pairs(const World &world, int pairs_per_class,
                                   std::uint64_t seed) {
  const std::vector<int> speakers = partition_speakers(world, Partition::kTrain);
  Rng rng(seed);
  std::uniform_int_distribution<int> pick_speaker(
      0, static_cast<int>(speakers.size()) - 1);
  std::uniform_int_distribution<int> pick_utt(
      0, world.config.utterances_per_speaker - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto bona = [&]() -> const std::vector<double> & {
    return world.bonafide[speakers[pick_speaker(rng)]][pick_utt(rng)];
  };
  auto spoof = [&]() -> const std::vector<double> & {
    return world.spoofed[speakers[pick_speaker(rng)]][pick_utt(rng)];
  };

  PairDataset dataset;
  for (int i = 0; i < pairs_per_class; ++i) {
    dataset.positives.push_back({bona(), bona(), 1});
  }
  for (int i = 0; i < pairs_per_class; ++i) {
    // At least one side spoofed; mix the three layouts.
    const double u = unit(rng);
    if (u < 0.5) {
      dataset.negatives.push_back({bona(), spoof(), 0});
    } else if (u < 0.75) {
      dataset.negatives.push_back({spoof(), bona(), 0});
    } else {
      dataset.negatives.push_back({spoof(), spoof(), 0});
    }
  }
  return dataset;
}

PolicyNet pretrain(PolicyNet net, const PairDataset &dataset,
                   const TrainConfig &config) {
  config.validate();
  if (dataset.positives.empty() || dataset.negatives.empty()) {
    throw std::runtime_error("pretraining requires both label classes");
  }
  Rng rng(config.seed);
  const int half = std::max(1, config.batch_size / 2);
  const std::size_t total = dataset.positives.size() + dataset.negatives.size();
  const int batches_per_epoch = static_cast<int>(
      (total + static_cast<std::size_t>(2 * half) - 1) / (2 * half));

  std::uniform_int_distribution<std::size_t> pick_pos(
      0, dataset.positives.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_neg(
      0, dataset.negatives.size() - 1);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (int batch = 0; batch < batches_per_epoch; ++batch) {
      Gradients acc = zeros_like(net);
      const double scale = 1.0 / (2 * half);
      for (int i = 0; i < half; ++i) {
        const PairSample &pos = dataset.positives[pick_pos(rng)];
        const ForwardCache cache = forward(net, pos.a, pos.b);
        accumulate(&acc, grad_bce(net, cache, 1), scale);
        const PairSample &neg = dataset.negatives[pick_neg(rng)];
        const ForwardCache cache_n = forward(net, neg.a, neg.b);
        accumulate(&acc, grad_bce(net, cache_n, 0), scale);
      }
      sgd_step(&net, acc, config.learning_rate, GradStep::kDescent);
    }
  }
  return net;
}

double mean_bce(const PolicyNet &net, const PairDataset &dataset) {
  double loss = 0.0;
  std::size_t count = 0;
  for (const std::vector<PairSample> *pool :
       {&dataset.positives, &dataset.negatives}) {
    for (const PairSample &sample : *pool) {
      const ForwardCache cache = forward(net, sample.a, sample.b);
      loss += bce_with_logit(cache.logit, sample.target);
      ++count;
    }
  }
  if (count == 0) throw std::runtime_error("mean_bce on an empty dataset");
  return loss / static_cast<double>(count);
}

SampleGrad reinforce_sample_grad(const TandemSystem &system, const Trial &trial,
                                 int a_asv, int a_cm,
                                 const RewardModel &reward_model) {
  const ForwardCache cache_asv =
      forward(system.asv, trial.enroll, trial.test_asv);
  const ForwardCache cache_cm = forward(system.cm, trial.test, trial.anchor);
  const SampleGradInternal g = tandem_logit_grads(
      cache_asv.prob, cache_cm.prob, a_asv, a_cm, reward_model, trial.truth);

  SampleGrad out;
  out.reward = g.reward_value;
  out.p_tandem = g.p_tandem;
  out.weighted_log_prob = g.log_p * g.reward_value;
  out.asv = backprop_logit(system.asv, cache_asv,
                           g.d_logit_asv * g.reward_value);
  out.cm = backprop_logit(system.cm, cache_cm, g.d_logit_cm * g.reward_value);
  return out;
}

EpochStats reinforce_epoch(TandemSystem *system, const TrialList &trials,
                           const RewardModel &reward_model,
                           const TrainConfig &config, Rng &rng) {
  config.validate();
  TrialSampler sampler(trials, config.spoof_fraction);
  const int batches = static_cast<int>(
      (trials.trials.size() + config.batch_size - 1) / config.batch_size);

  EpochStats stats;
  double reward_sum = 0.0;
  double objective_sum = 0.0;
  for (int batch = 0; batch < batches; ++batch) {
    Gradients acc_asv = zeros_like(system->asv);
    Gradients acc_cm = zeros_like(system->cm);
    const double scale = 1.0 / config.batch_size;
    double batch_objective = 0.0;
    for (int i = 0; i < config.batch_size; ++i) {
      const Trial &trial = trials.trials[sampler.draw(rng)];
      const ForwardCache cache_asv =
          forward(system->asv, trial.enroll, trial.test_asv);
      const ForwardCache cache_cm =
          forward(system->cm, trial.test, trial.anchor);
      const int a_asv = sample_bernoulli(cache_asv.prob, rng);
      const int a_cm = sample_bernoulli(cache_cm.prob, rng);
      const SampleGradInternal g =
          tandem_logit_grads(cache_asv.prob, cache_cm.prob, a_asv, a_cm,
                             reward_model, trial.truth);
      accumulate(&acc_asv,
                 backprop_logit(system->asv, cache_asv,
                                g.d_logit_asv * g.reward_value),
                 scale);
      accumulate(&acc_cm,
                 backprop_logit(system->cm, cache_cm,
                                g.d_logit_cm * g.reward_value),
                 scale);
      reward_sum += g.reward_value;
      batch_objective += scale * g.log_p * g.reward_value;
    }
    if (!std::isfinite(batch_objective)) {
      throw std::runtime_error("non-finite loss: aborting epoch");
    }
    objective_sum += batch_objective;
    sgd_step(&system->asv, acc_asv, config.learning_rate, GradStep::kAscent);
    sgd_step(&system->cm, acc_cm, config.learning_rate, GradStep::kAscent);
  }
  stats.batches = batches;
  stats.mean_reward =
      reward_sum / (static_cast<double>(batches) * config.batch_size);
  stats.mean_objective = objective_sum / batches;
  return stats;
}

EpochStats im_epoch(TandemSystem *system, const TrialList &trials,
                    const TrainConfig &config, bool same_labels, Rng &rng) {
  config.validate();
  TrialSampler sampler(trials, config.spoof_fraction);
  const int batches = static_cast<int>(
      (trials.trials.size() + config.batch_size - 1) / config.batch_size);

  EpochStats stats;
  double loss_sum = 0.0;
  for (int batch = 0; batch < batches; ++batch) {
    Gradients acc_asv = zeros_like(system->asv);
    Gradients acc_cm = zeros_like(system->cm);
    const double scale = 1.0 / config.batch_size;
    double batch_loss = 0.0;
    for (int i = 0; i < config.batch_size; ++i) {
      const Trial &trial = trials.trials[sampler.draw(rng)];
      const int label_asv =
          same_labels ? tandem_label(trial.truth) : trial.truth.asv_label;
      const int label_cm =
          same_labels ? tandem_label(trial.truth) : trial.truth.cm_label;
      const ForwardCache cache_asv =
          forward(system->asv, trial.enroll, trial.test_asv);
      const ForwardCache cache_cm =
          forward(system->cm, trial.test, trial.anchor);
      accumulate(&acc_asv, grad_bce(system->asv, cache_asv, label_asv), scale);
      accumulate(&acc_cm, grad_bce(system->cm, cache_cm, label_cm), scale);
      batch_loss += scale * (bce_with_logit(cache_asv.logit, label_asv) +
                             bce_with_logit(cache_cm.logit, label_cm));
    }
    if (!std::isfinite(batch_loss)) {
      throw std::runtime_error("non-finite loss: aborting epoch");
    }
    loss_sum += batch_loss;
    sgd_step(&system->asv, acc_asv, config.learning_rate, GradStep::kDescent);
    sgd_step(&system->cm, acc_cm, config.learning_rate, GradStep::kDescent);
  }
  stats.batches = batches;
  stats.mean_reward = nan_value();
  stats.mean_objective = loss_sum / batches;
  return stats;
}

void score_trials(const TandemSystem &system, const TrialList &trials,
                  std::vector<double> *asv_scores,
                  std::vector<double> *cm_scores,
                  std::vector<TrialClass> *classes) {
  asv_scores->clear();
  cm_scores->clear();
  classes->clear();
  for (const Trial &trial : trials.trials) {
    asv_scores->push_back(
        forward(system.asv, trial.enroll, trial.test_asv).logit);
    cm_scores->push_back(forward(system.cm, trial.test, trial.anchor).logit);
    classes->push_back(class_of(trial.truth));
  }
}

namespace {

ScoreStats score_stats(std::span<const double> scores) {
  ScoreStats stats;
  if (scores.empty()) return stats;
  std::vector<double> abs_scores(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    abs_scores[i] = std::abs(scores[i]);
    stats.mean_abs += abs_scores[i];
  }
  stats.mean_abs /= static_cast<double>(scores.size());
  std::sort(abs_scores.begin(), abs_scores.end());
  stats.p50 = abs_scores[abs_scores.size() / 2];
  stats.p90 = abs_scores[(abs_scores.size() * 9) / 10];
  stats.max_abs = abs_scores.back();
  return stats;
}

}  // namespace

EvalRecord evaluate(const TandemSystem &system, const TrialList &trials,
                    const CostModel &cost) {
  std::vector<double> asv_scores, cm_scores;
  std::vector<TrialClass> classes;
  score_trials(system, trials, &asv_scores, &cm_scores, &classes);
  return evaluate_scores(asv_scores, cm_scores, classes, cost);
}

EvalRecord evaluate_scores(std::span<const double> asv_scores,
                           std::span<const double> cm_scores,
                           std::span<const TrialClass> classes,
                           const CostModel &cost) {
  EvalRecord record;
  std::vector<double> asv_bona_scores, cm_tarnon_scores;
  std::vector<int> tarnon_labels, bona_labels, all_cm_labels;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const bool bona = classes[i] != TrialClass::kSpoof;
    all_cm_labels.push_back(bona ? 1 : 0);
    if (bona) {
      asv_bona_scores.push_back(asv_scores[i]);
      cm_tarnon_scores.push_back(cm_scores[i]);
      tarnon_labels.push_back(classes[i] == TrialClass::kTarget ? 1 : 0);
    }
    switch (classes[i]) {
      case TrialClass::kTarget:
        ++record.counts.targets;
        break;
      case TrialClass::kNontarget:
        ++record.counts.nontargets;
        break;
      case TrialClass::kSpoof:
        ++record.counts.spoofs;
        break;
    }
  }

  const EerResult asv_eer = compute_eer(asv_bona_scores, tarnon_labels);
  record.asv_eer = asv_eer.eer;
  record.asv_eer_threshold = asv_eer.threshold;

  const EerResult cm_eer = compute_eer(cm_scores, all_cm_labels);
  record.cm_eer = cm_eer.eer;
  record.cm_eer_threshold = cm_eer.threshold;

  const MinTdcfResult tdcf_result =
      min_norm_tdcf(asv_scores, cm_scores, classes, cost);
  record.tdcf_norm_min = tdcf_result.value;
  record.tdcf_cm_threshold = tdcf_result.cm_threshold;
  record.tdcf_asv_threshold = tdcf_result.asv_threshold;
  record.tdcf_min_raw = tdcf_result.min_tdcf;
  record.tdcf_normalizer = tdcf_result.normalizer;

  // Swapped-task diagnostics.
  record.asv_on_cm_eer = compute_eer(asv_scores, all_cm_labels).eer;
  record.cm_on_asv_eer = compute_eer(cm_tarnon_scores, tarnon_labels).eer;

  record.asv_scores = score_stats(asv_scores);
  record.cm_scores = score_stats(cm_scores);
  return record;
}

namespace {

double relative_pct(double current, double initial) {
  if (initial == 0.0) return nan_value();
  return 100.0 * (current - initial) / initial;
}

EpochReport make_report(int epoch, const EvalRecord &dev,
                        const EvalRecord &eval, const EvalRecord &initial_dev,
                        const EvalRecord &initial_eval, double mean_reward) {
  EpochReport report;
  report.epoch = epoch;
  report.dev_tdcf = dev.tdcf_norm_min;
  report.eval_tdcf = eval.tdcf_norm_min;
  report.asv_eer = eval.asv_eer;
  report.cm_eer = eval.cm_eer;
  report.mean_reward = mean_reward;
  report.dev_tdcf_rel_pct =
      epoch == 0 ? 0.0
                 : relative_pct(dev.tdcf_norm_min, initial_dev.tdcf_norm_min);
  report.eval_tdcf_rel_pct =
      epoch == 0
          ? 0.0
          : relative_pct(eval.tdcf_norm_min, initial_eval.tdcf_norm_min);
  report.asv_eer_rel_pct =
      epoch == 0 ? 0.0 : relative_pct(eval.asv_eer, initial_eval.asv_eer);
  report.cm_eer_rel_pct =
      epoch == 0 ? 0.0 : relative_pct(eval.cm_eer, initial_eval.cm_eer);
  report.dev_asv_eer = dev.asv_eer;
  report.dev_cm_eer = dev.cm_eer;
  return report;
}

}  // namespace

RunResult run_tandem(TandemSystem system, const TrialList &dev,
                     const TrialList &eval, const TrainConfig &config,
                     const CostModel &cost) {
  config.validate();
  cost.validate();

  RunResult result;
  result.initial_dev = evaluate(system, dev, cost);
  result.initial_eval = evaluate(system, eval, cost);
  result.epochs.push_back(make_report(0, result.initial_dev,
                                      result.initial_eval, result.initial_dev,
                                      result.initial_eval, nan_value()));

  Rng rng(config.seed);
  EvalRecord dev_record = result.initial_dev;
  EvalRecord eval_record = result.initial_eval;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochStats stats;
    switch (config.method) {
      case TrainMethod::kReinforce:
        stats = reinforce_epoch(&system, dev, config.reward, config, rng);
        break;
      case TrainMethod::kImSeparate:
        stats = im_epoch(&system, dev, config, /*same_labels=*/false, rng);
        break;
      case TrainMethod::kImSame:
        stats = im_epoch(&system, dev, config, /*same_labels=*/true, rng);
        break;
    }
    dev_record = evaluate(system, dev, cost);
    eval_record = evaluate(system, eval, cost);
    result.epochs.push_back(make_report(epoch, dev_record, eval_record,
                                        result.initial_dev,
                                        result.initial_eval,
                                        stats.mean_reward));
  }

  result.final_dev = dev_record;
  result.final_eval = eval_record;
  system.asv_threshold = eval_record.tdcf_asv_threshold;
  system.cm_threshold = eval_record.tdcf_cm_threshold;
  result.system = std::move(system);
  return result;
}

}  // namespace tandem
