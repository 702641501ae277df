// tests/test_tandem.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.h"
#include "tandem/train.h"
#include "test_util.h"

using namespace tandem;
using tandem::test::flatten;

namespace {

bool same_parameters(const PolicyNet &a, const PolicyNet &b) {
  auto same_layers = [](const std::vector<Layer> &x,
                        const std::vector<Layer> &y) {
    for (std::size_t l = 0; l < x.size(); ++l) {
      if (x[l].w != y[l].w || x[l].b != y[l].b) return false;
    }
    return true;
  };
  return same_layers(a.encoder, b.encoder) && same_layers(a.head, b.head);
}

// ASV scoring net computing logit = k * (tau - |a - b|_1) exactly.
PolicyNet l1_distance_net(int dim, double tau, double k) {
  LayerSpec spec;
  spec.input_dim = dim;
  spec.encoder = {2 * dim};
  spec.head = {2 * dim, 1};
  PolicyNet net = init_network(spec, 0);
  auto zero = [](Layer &layer) {
    std::fill(layer.w.begin(), layer.w.end(), 0.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  };
  zero(net.encoder[0]);
  zero(net.head[0]);
  zero(net.head[1]);
  // Encoder: (x_i)+ and (-x_i)+ per dimension, so differences of the two
  // recover x_i.
  for (int i = 0; i < dim; ++i) {
    net.encoder[0].w[static_cast<std::size_t>(2 * i) * dim + i] = 1.0;
    net.encoder[0].w[static_cast<std::size_t>(2 * i + 1) * dim + i] = -1.0;
  }
  // Head hidden layer: (a_i - b_i)+ and (b_i - a_i)+.
  const int in = 4 * dim;
  for (int i = 0; i < dim; ++i) {
    double *row_pos = net.head[0].w.data() + static_cast<std::size_t>(2 * i) * in;
    double *row_neg =
        net.head[0].w.data() + static_cast<std::size_t>(2 * i + 1) * in;
    row_pos[2 * i] = 1.0;
    row_pos[2 * i + 1] = -1.0;
    row_pos[2 * dim + 2 * i] = -1.0;
    row_pos[2 * dim + 2 * i + 1] = 1.0;
    for (int c = 0; c < in; ++c) row_neg[c] = -row_pos[c];
  }
  for (double &w : net.head[1].w) w = -k;
  net.head[1].b[0] = k * tau;
  return net;
}

// CM scoring net computing logit = k * (tau - <test, direction>); the
// anchor branch carries zero weight.
PolicyNet projection_net(int dim, int direction_axis, double tau, double k) {
  LayerSpec spec;
  spec.input_dim = dim;
  spec.encoder = {2};
  spec.head = {1};
  PolicyNet net = init_network(spec, 0);
  std::fill(net.encoder[0].w.begin(), net.encoder[0].w.end(), 0.0);
  std::fill(net.encoder[0].b.begin(), net.encoder[0].b.end(), 0.0);
  std::fill(net.head[0].w.begin(), net.head[0].w.end(), 0.0);
  net.encoder[0].w[direction_axis] = 1.0;
  net.encoder[0].w[dim + direction_axis] = -1.0;
  net.head[0].w[0] = -k;
  net.head[0].w[1] = k;
  net.head[0].b[0] = k * tau;
  return net;
}

// A deterministic world where both handcrafted systems are perfect with
// wide margins: speakers spaced along axis 0, spoofs displaced along the
// last axis, tiny utterance jitter.
struct PerfectFixture {
  World world;
  TandemSystem system;
  TrialList dev;
  TrialList eval;
};

PerfectFixture perfect_fixture() {
  PerfectFixture fx;
  WorldConfig config;
  config.num_speakers = 4;
  config.embedding_dim = 8;
  config.speaker_spread = 1.0;   // unused: means are placed by hand
  config.utterance_noise = 0.01;
  config.spoof_offset = 0.5;
  config.utterances_per_speaker = 12;
  config.seed = 1;
  fx.world.config = config;

  Rng rng(17);
  std::normal_distribution<double> jitter(0.0, config.utterance_noise);
  const int d = config.embedding_dim;
  fx.world.spoof_direction.assign(d, 0.0);
  fx.world.spoof_direction[d - 1] = 1.0;
  for (int s = 0; s < config.num_speakers; ++s) {
    std::vector<double> mean(d, 0.0);
    mean[0] = 3.0 * s;
    fx.world.speaker_means.push_back(mean);
    std::vector<std::vector<double>> bona, spoof;
    for (int u = 0; u < config.utterances_per_speaker; ++u) {
      std::vector<double> utt = mean;
      for (double &v : utt) v += jitter(rng);
      bona.push_back(utt);
      std::vector<double> sp = mean;
      sp[d - 1] += config.spoof_offset;
      for (double &v : sp) v += jitter(rng);
      spoof.push_back(sp);
    }
    fx.world.bonafide.push_back(std::move(bona));
    fx.world.spoofed.push_back(std::move(spoof));
  }

  fx.system.asv = l1_distance_net(d, 1.0, 1e6);
  fx.system.cm = projection_net(d, d - 1, 0.25, 1e6);
  fx.dev = build_trials(fx.world, {24, 24, 48}, Partition::kDev, 5);
  fx.eval = build_trials(fx.world, {24, 24, 48}, Partition::kEval, 6);
  return fx;
}

WorldConfig trainable_world_config() {
  WorldConfig config;
  config.num_speakers = 80;
  config.embedding_dim = 12;
  config.speaker_spread = 2.0;
  config.utterance_noise = 0.3;
  config.spoof_offset = 10.0;
  config.utterances_per_speaker = 24;
  config.seed = 99;
  return config;
}

LayerSpec small_net_spec(int dim) {
  LayerSpec spec;
  spec.input_dim = dim;
  spec.encoder = {16, 8};
  spec.head = {8, 1};
  return spec;
}

double asv_trial_bce(const PolicyNet &net, const TrialList &list) {
  double loss = 0.0;
  for (const Trial &t : list.trials) {
    loss += bce_with_logit(forward(net, t.enroll, t.test_asv).logit,
                           t.truth.asv_label);
  }
  return loss / list.trials.size();
}

bool same_record(const EvalRecord &a, const EvalRecord &b) {
  return a.asv_eer == b.asv_eer && a.cm_eer == b.cm_eer &&
         a.tdcf_norm_min == b.tdcf_norm_min &&
         a.tdcf_cm_threshold == b.tdcf_cm_threshold &&
         a.asv_on_cm_eer == b.asv_on_cm_eer &&
         a.cm_on_asv_eer == b.cm_on_asv_eer;
}

}  // namespace

TEST_CASE("tandem action probabilities are a proper distribution") {
  // The two branches of the tandem probability must sum to one exactly.
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      const double p_asv = i / 100.0;
      const double p_cm = j / 100.0;
      const double joint = p_asv * p_cm;
      CHECK(joint + (1.0 - joint) == 1.0);
    }
  }

  // Same bookkeeping through the implementation path.
  const PerfectFixture fx = perfect_fixture();
  RewardModel model;
  const Trial &trial = fx.dev.trials.front();
  const SampleGrad g11 = reinforce_sample_grad(fx.system, trial, 1, 1, model);
  const SampleGrad g10 = reinforce_sample_grad(fx.system, trial, 1, 0, model);
  const SampleGrad g01 = reinforce_sample_grad(fx.system, trial, 0, 1, model);
  const SampleGrad g00 = reinforce_sample_grad(fx.system, trial, 0, 0, model);
  CHECK(g11.p_tandem + g10.p_tandem == 1.0);
  CHECK(g10.p_tandem == g01.p_tandem);
  CHECK(g10.p_tandem == g00.p_tandem);
}

TEST_CASE("enumerated action expectation matches the exact policy gradient") {
  Rng rng(2718);
  const RewardKind kinds[] = {RewardKind::kSimple, RewardKind::kReward,
                              RewardKind::kPenalize, RewardKind::kTDcf};
  const GroundTruth truths[] = {{1, 1}, {0, 1}, {1, 0}};
  std::normal_distribution<double> normal(0.0, 1.0);

  for (int round = 0; round < 6; ++round) {
    TandemSystem system;
    system.asv = init_network(small_net_spec(6), rng());
    system.cm = init_network(small_net_spec(6), rng());

    Trial trial;
    trial.enroll.resize(6);
    trial.test.resize(6);
    trial.anchor.resize(6);
    for (double *vec : {trial.enroll.data(), trial.test.data(),
                        trial.anchor.data()}) {
      for (int i = 0; i < 6; ++i) vec[i] = normal(rng);
    }
    trial.test_asv = trial.test;
    trial.truth = truths[round % 3];

    RewardModel model;
    model.kind = kinds[round % 4];

    const ForwardCache cache_asv =
        forward(system.asv, trial.enroll, trial.test_asv);
    const ForwardCache cache_cm =
        forward(system.cm, trial.test, trial.anchor);
    const double pa = cache_asv.prob;
    const double pc = cache_cm.prob;

    // Expectation of the REINFORCE per-sample gradient over all four
    // action pairs.
    std::vector<double> exp_asv, exp_cm;
    for (int a_asv : {0, 1}) {
      for (int a_cm : {0, 1}) {
        const double weight = (a_asv == 1 ? pa : 1.0 - pa) *
                              (a_cm == 1 ? pc : 1.0 - pc);
        const SampleGrad g =
            reinforce_sample_grad(system, trial, a_asv, a_cm, model);
        const std::vector<double> ga = flatten(g.asv);
        const std::vector<double> gc = flatten(g.cm);
        if (exp_asv.empty()) {
          exp_asv.assign(ga.size(), 0.0);
          exp_cm.assign(gc.size(), 0.0);
        }
        for (std::size_t i = 0; i < ga.size(); ++i) exp_asv[i] += weight * ga[i];
        for (std::size_t i = 0; i < gc.size(); ++i) exp_cm[i] += weight * gc[i];
      }
    }

    // Exact gradient of E[r] = r0 + pa * pc * (r1 - r0).
    const double r1 = reward(model, 1, trial.truth);
    const double r0 = reward(model, 0, trial.truth);
    const double factor = r1 - r0;
    const std::vector<double> true_asv = flatten(backprop_logit(
        system.asv, cache_asv, factor * pc * pa * (1.0 - pa)));
    const std::vector<double> true_cm = flatten(backprop_logit(
        system.cm, cache_cm, factor * pa * pc * (1.0 - pc)));

    auto check_match = [](const std::vector<double> &expected,
                          const std::vector<double> &actual) {
      double diff2 = 0.0, norm2 = 0.0;
      for (std::size_t i = 0; i < expected.size(); ++i) {
        diff2 += (expected[i] - actual[i]) * (expected[i] - actual[i]);
        norm2 += expected[i] * expected[i];
      }
      if (norm2 == 0.0) {
        CHECK(diff2 == 0.0);
        return;
      }
      CHECK(std::sqrt(diff2 / norm2) < 1e-6);
    };
    check_match(true_asv, exp_asv);
    check_match(true_cm, exp_cm);
  }
}

TEST_CASE("zero reward on every sample leaves the parameters untouched") {
  const PerfectFixture fx = perfect_fixture();

  // The handcrafted system takes the correct tandem action on every trial,
  // so the penalize reward is identically zero across the epoch.
  TandemSystem system = fx.system;
  TrainConfig config;
  config.method = TrainMethod::kReinforce;
  config.reward.kind = RewardKind::kPenalize;
  config.epochs = 1;

  Rng rng(31);
  const EpochStats stats =
      reinforce_epoch(&system, fx.dev, config.reward, config, rng);
  CHECK(stats.mean_reward == 0.0);
  CHECK(same_parameters(system.asv, fx.system.asv));
  CHECK(same_parameters(system.cm, fx.system.cm));
}

TEST_CASE("sample-level gradients vanish when the reward is zero") {
  const PerfectFixture fx = perfect_fixture();
  RewardModel model;
  model.kind = RewardKind::kPenalize;
  const Trial &target = fx.dev.trials.front();
  REQUIRE(class_of(target.truth) == TrialClass::kTarget);
  // Correct action pair on a target: accept/accept, reward 0.
  const SampleGrad g = reinforce_sample_grad(fx.system, target, 1, 1, model);
  CHECK(g.reward == 0.0);
  for (double v : flatten(g.asv)) CHECK(v == 0.0);
  for (double v : flatten(g.cm)) CHECK(v == 0.0);
}

TEST_CASE("evaluation of the handcrafted perfect system") {
  const PerfectFixture fx = perfect_fixture();
  const CostModel cost;
  const EvalRecord record = evaluate(fx.system, fx.eval, cost);
  CHECK(record.asv_eer == 0.0);
  CHECK(record.cm_eer == 0.0);
  CHECK(record.tdcf_norm_min == 0.0);
  CHECK(record.counts.targets == 24);
  CHECK(record.counts.spoofs == 48);

  // Deterministic: repeated evaluation produces the identical record.
  const EvalRecord again = evaluate(fx.system, fx.eval, cost);
  CHECK(same_record(record, again));
}

TEST_CASE("constant scores evaluate to chance EER and unit t-DCF") {
  PerfectFixture fx = perfect_fixture();
  TandemSystem flat;
  flat.asv = init_network(fx.system.asv.spec, 3);
  flat.cm = init_network(fx.system.cm.spec, 4);
  for (PolicyNet *net : {&flat.asv, &flat.cm}) {
    for (std::vector<Layer> *layers : {&net->encoder, &net->head}) {
      for (Layer &layer : *layers) {
        std::fill(layer.w.begin(), layer.w.end(), 0.0);
        std::fill(layer.b.begin(), layer.b.end(), 0.0);
      }
    }
  }
  const EvalRecord record = evaluate(flat, fx.eval, CostModel{});
  CHECK(record.asv_eer == 0.5);
  CHECK(record.cm_eer == 0.5);
  CHECK(record.tdcf_norm_min == 1.0);
}

TEST_CASE("evaluation consumes no randomness") {
  const PerfectFixture fx = perfect_fixture();
  const CostModel cost;

  Rng probe(1234);
  const std::uint64_t first = probe();
  (void)evaluate(fx.system, fx.eval, cost);
  const std::uint64_t second = probe();
  (void)evaluate(fx.system, fx.dev, cost);
  const std::uint64_t third = probe();

  Rng control(1234);
  CHECK(first == control());
  CHECK(second == control());
  CHECK(third == control());
}

TEST_CASE("pretraining") {
  const World world = generate_world(trainable_world_config());
  const LayerSpec spec = small_net_spec(world.config.embedding_dim);

  SUBCASE("zero epochs return the network unchanged") {
    const PolicyNet net = init_network(spec, 11);
    TrainConfig config;
    config.learning_rate = 0.05;
    config.epochs = 0;
    const PairDataset pairs = make_asv_pretrain_pairs(world, 200, 1);
    const PolicyNet out = pretrain(net, pairs, config);
    CHECK(same_parameters(net, out));
  }

  SUBCASE("fixed seeds give bit-identical results") {
    TrainConfig config;
    config.learning_rate = 0.05;
    config.epochs = 3;
    config.seed = 77;
    const PairDataset pairs = make_asv_pretrain_pairs(world, 400, 2);
    const PolicyNet a = pretrain(init_network(spec, 11), pairs, config);
    const PolicyNet b = pretrain(init_network(spec, 11), pairs, config);
    CHECK(same_parameters(a, b));
  }

  SUBCASE("single-class datasets are rejected") {
    PairDataset pairs = make_asv_pretrain_pairs(world, 50, 3);
    pairs.negatives.clear();
    TrainConfig config;
    config.learning_rate = 0.05;
    config.epochs = 1;
    CHECK_THROWS(pretrain(init_network(spec, 11), pairs, config));
  }

  SUBCASE("separable world trains both systems below 5% EER") {
    TrainConfig config;
    config.learning_rate = 0.05;
    config.epochs = 16;
    config.seed = 5;
    TandemSystem system;
    system.asv = pretrain(init_network(spec, 21),
                          make_asv_pretrain_pairs(world, 3000, 6), config);
    system.cm = pretrain(init_network(spec, 22),
                         make_cm_pretrain_pairs(world, 3000, 7), config);
    const TrialList held_out =
        build_trials(world, {80, 80, 160}, Partition::kEval, 9);
    const EvalRecord record = evaluate(system, held_out, CostModel{});
    CHECK(record.asv_eer < 0.05);
    CHECK(record.cm_eer < 0.05);

    // Pretraining reduced the held-out cross-entropy as well.
    PairDataset held_pairs = make_asv_pretrain_pairs(world, 400, 8);
    CHECK(mean_bce(system.asv, held_pairs) <
          mean_bce(init_network(spec, 21), held_pairs));
  }

  SUBCASE("without the spoof offset the CM stays at chance") {
    WorldConfig config = trainable_world_config();
    config.spoof_offset = 0.0;
    const World flat_world = generate_world(config);
    TrainConfig train;
    train.learning_rate = 0.05;
    train.epochs = 6;
    train.seed = 5;
    const PolicyNet cm =
        pretrain(init_network(spec, 31),
                 make_cm_pretrain_pairs(flat_world, 1000, 12), train);
    TandemSystem system;
    system.asv = init_network(spec, 32);
    system.cm = cm;
    const TrialList held_out =
        build_trials(flat_world, {100, 100, 300}, Partition::kEval, 13);
    const EvalRecord record = evaluate(system, held_out, CostModel{});
    CHECK(record.cm_eer > 0.45);
    CHECK(record.cm_eer < 0.55);
  }
}

TEST_CASE("cross-entropy fine-tuning with flipped labels hurts held-out loss") {
  const World world = generate_world(trainable_world_config());
  const LayerSpec spec = small_net_spec(world.config.embedding_dim);
  TrainConfig pre;
  pre.learning_rate = 0.05;
  pre.epochs = 4;
  pre.seed = 40;
  TandemSystem base;
  base.asv = pretrain(init_network(spec, 41),
                      make_asv_pretrain_pairs(world, 800, 42), pre);
  base.cm = pretrain(init_network(spec, 43),
                     make_cm_pretrain_pairs(world, 800, 44), pre);

  const TrialList dev = build_trials(world, {60, 60, 120}, Partition::kDev, 45);
  TrialList flipped = dev;
  for (Trial &t : flipped.trials) t.truth.asv_label ^= 1;
  const TrialList held_out =
      build_trials(world, {60, 60, 120}, Partition::kEval, 46);

  TrainConfig tune;
  tune.learning_rate = 0.01;
  tune.epochs = 4;
  tune.seed = 47;
  tune.method = TrainMethod::kImSeparate;

  TandemSystem straight = base;
  TandemSystem crossed = base;
  Rng rng_a(48), rng_b(48);
  for (int epoch = 0; epoch < tune.epochs; ++epoch) {
    im_epoch(&straight, dev, tune, /*same_labels=*/false, rng_a);
    im_epoch(&crossed, flipped, tune, /*same_labels=*/false, rng_b);
  }
  CHECK(asv_trial_bce(crossed.asv, held_out) >
        asv_trial_bce(straight.asv, held_out));
}

TEST_CASE("full tandem runs") {
  const World world = generate_world(trainable_world_config());
  const LayerSpec spec = small_net_spec(world.config.embedding_dim);
  TrainConfig pre;
  pre.learning_rate = 0.05;
  pre.epochs = 4;
  pre.seed = 50;
  TandemSystem system;
  system.asv = pretrain(init_network(spec, 51),
                        make_asv_pretrain_pairs(world, 600, 52), pre);
  system.cm = pretrain(init_network(spec, 53),
                       make_cm_pretrain_pairs(world, 600, 54), pre);
  const TrialList dev = build_trials(world, {40, 40, 120}, Partition::kDev, 55);
  const TrialList eval =
      build_trials(world, {40, 40, 120}, Partition::kEval, 56);
  const CostModel cost;

  SUBCASE("epoch reports carry the relative-change bookkeeping") {
    TrainConfig tandem_config;
    tandem_config.epochs = 3;
    tandem_config.seed = 57;
    tandem_config.method = TrainMethod::kReinforce;
    tandem_config.reward.kind = RewardKind::kSimple;
    const RunResult result =
        run_tandem(system, dev, eval, tandem_config, cost);
    REQUIRE(result.epochs.size() == 4);
    CHECK(result.epochs[0].epoch == 0);
    CHECK(result.epochs[0].dev_tdcf_rel_pct == 0.0);
    CHECK(std::isnan(result.epochs[0].mean_reward));
    CHECK(std::isfinite(result.epochs[1].mean_reward));
    CHECK(result.epochs[0].dev_tdcf == result.initial_dev.tdcf_norm_min);
    CHECK(result.epochs.back().eval_tdcf ==
          result.final_eval.tdcf_norm_min);
    CHECK(result.system.asv_threshold ==
          result.final_eval.tdcf_asv_threshold);
  }

  SUBCASE("cross-entropy baselines run and report NaN rewards") {
    TrainConfig tandem_config;
    tandem_config.epochs = 2;
    tandem_config.seed = 58;
    tandem_config.method = TrainMethod::kImSame;
    const RunResult result =
        run_tandem(system, dev, eval, tandem_config, cost);
    REQUIRE(result.epochs.size() == 3);
    CHECK(std::isnan(result.epochs[1].mean_reward));
    CHECK(std::isfinite(result.final_eval.tdcf_norm_min));
  }

  SUBCASE("zero tandem epochs keep the initial records") {
    TrainConfig tandem_config;
    tandem_config.epochs = 0;
    tandem_config.seed = 59;
    tandem_config.method = TrainMethod::kImSeparate;
    const RunResult result =
        run_tandem(system, dev, eval, tandem_config, cost);
    CHECK(result.epochs.size() == 1);
    CHECK(result.final_eval.tdcf_norm_min ==
          result.initial_eval.tdcf_norm_min);
  }

  SUBCASE("identical seeds reproduce the whole pipeline bit-exactly") {
    TrainConfig tandem_config;
    tandem_config.epochs = 3;
    tandem_config.seed = 60;
    tandem_config.method = TrainMethod::kReinforce;
    tandem_config.reward.kind = RewardKind::kTDcf;
    tandem_config.reward.cost = cost;
    const RunResult a = run_tandem(system, dev, eval, tandem_config, cost);
    const RunResult b = run_tandem(system, dev, eval, tandem_config, cost);
    CHECK(same_parameters(a.system.asv, b.system.asv));
    CHECK(same_parameters(a.system.cm, b.system.cm));
    CHECK(same_record(a.final_eval, b.final_eval));
    CHECK(a.final_dev.tdcf_norm_min == b.final_dev.tdcf_norm_min);
  }
}
