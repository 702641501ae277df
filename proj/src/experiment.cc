// src/experiment.cc

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

#include "tandem/experiment.h"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "tandem/score_io.h"

namespace tandem {

namespace {

using nlohmann::json;

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc;
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

// JSON cannot hold non-finite numbers; encode them as strings.
json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json eval_record_json(const EvalRecord &r) {
  return json{
      {"asv_eer", r.asv_eer},
      {"asv_eer_threshold", json_number(r.asv_eer_threshold)},
      {"cm_eer", r.cm_eer},
      {"cm_eer_threshold", json_number(r.cm_eer_threshold)},
      {"tdcf",
       {{"norm_min", r.tdcf_norm_min},
        {"cm_threshold", json_number(r.tdcf_cm_threshold)},
        {"asv_threshold", json_number(r.tdcf_asv_threshold)},
        {"min_raw", r.tdcf_min_raw},
        {"normalizer", r.tdcf_normalizer}}},
      {"cross_task",
       {{"asv_on_cm_eer", r.asv_on_cm_eer},
        {"cm_on_asv_eer", r.cm_on_asv_eer}}},
      {"score_stats",
       {{"asv",
         {{"mean_abs", r.asv_scores.mean_abs},
          {"p50", r.asv_scores.p50},
          {"p90", r.asv_scores.p90},
          {"max_abs", r.asv_scores.max_abs}}},
        {"cm",
         {{"mean_abs", r.cm_scores.mean_abs},
          {"p50", r.cm_scores.p50},
          {"p90", r.cm_scores.p90},
          {"max_abs", r.cm_scores.max_abs}}}}},
      {"counts",
       {{"target", r.counts.targets},
        {"nontarget", r.counts.nontargets},
        {"spoof", r.counts.spoofs}}}};
}

json cost_json(const CostModel &cost) {
  return json{{"c_miss", cost.c_miss},       {"c_fa", cost.c_fa},
              {"c_fa_spoof", cost.c_fa_spoof}, {"rho_tar", cost.rho_tar},
              {"rho_non", cost.rho_non},     {"rho_spoof", cost.rho_spoof}};
}

json config_json(const ExperimentConfig &c) {
  auto spec_json = [](const LayerSpec &s) {
    return json{{"input_dim", s.input_dim},
                {"encoder", s.encoder},
                {"head", s.head}};
  };
  auto train_json = [](const TrainConfig &t) {
    return json{{"learning_rate", t.learning_rate},
                {"batch_size", t.batch_size},
                {"epochs", t.epochs},
                {"spoof_fraction", t.spoof_fraction}};
  };
  auto counts_json = [](const TrialCounts &n) {
    return json{
        {"targets", n.targets}, {"nontargets", n.nontargets},
        {"spoofs", n.spoofs}};
  };
  std::vector<std::string> method_names;
  for (const MethodSpec &m : c.methods) method_names.push_back(method_key(m));
  return json{
      {"world",
       {{"num_speakers", c.world.num_speakers},
        {"embedding_dim", c.world.embedding_dim},
        {"speaker_spread", c.world.speaker_spread},
        {"utterance_noise", c.world.utterance_noise},
        {"spoof_offset", c.world.spoof_offset},
        {"utterances_per_speaker", c.world.utterances_per_speaker},
        {"seed", c.world.seed}}},
      {"asv_spec", spec_json(c.asv_spec)},
      {"cm_spec", spec_json(c.cm_spec)},
      {"pretrain", train_json(c.pretrain)},
      {"tandem", train_json(c.tandem)},
      {"cost", cost_json(c.cost)},
      {"trials",
       {{"train", counts_json(c.trials.train)},
        {"dev", counts_json(c.trials.dev)},
        {"eval", counts_json(c.trials.eval)},
        {"seed", c.trials.seed}}},
      {"pretrain_pairs", c.pretrain_pairs},
      {"repetitions", c.repetitions},
      {"base_seed", c.base_seed},
      {"methods", method_names}};
}

void write_json_file(const std::filesystem::path &path, const json &value) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << value.dump(2) << '\n';
}

std::string csv_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_epochs_csv(const std::filesystem::path &path,
                      const std::vector<EpochReport> &epochs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "epoch,dev_tdcf,eval_tdcf,asv_eer,cm_eer,mean_reward,"
         "dev_tdcf_rel_pct,eval_tdcf_rel_pct,asv_eer_rel_pct,cm_eer_rel_pct,"
         "dev_asv_eer,dev_cm_eer\n";
  for (const EpochReport &e : epochs) {
    out << e.epoch << ',' << csv_value(e.dev_tdcf) << ','
        << csv_value(e.eval_tdcf) << ',' << csv_value(e.asv_eer) << ','
        << csv_value(e.cm_eer) << ',' << csv_value(e.mean_reward) << ','
        << csv_value(e.dev_tdcf_rel_pct) << ','
        << csv_value(e.eval_tdcf_rel_pct) << ','
        << csv_value(e.asv_eer_rel_pct) << ',' << csv_value(e.cm_eer_rel_pct)
        << ',' << csv_value(e.dev_asv_eer) << ',' << csv_value(e.dev_cm_eer)
        << '\n';
  }
}

std::vector<ScoredTrial> scored_trials(const TandemSystem &system,
                                       const TrialList &list) {
  std::vector<double> asv_scores, cm_scores;
  std::vector<TrialClass> classes;
  score_trials(system, list, &asv_scores, &cm_scores, &classes);
  std::vector<ScoredTrial> records;
  records.reserve(list.trials.size());
  for (std::size_t i = 0; i < list.trials.size(); ++i) {
    records.push_back(
        {list.trials[i].id, classes[i], asv_scores[i], cm_scores[i]});
  }
  return records;
}

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;
};

// Population standard deviation, so a single repetition reports 0.
Stats stats_of(const std::vector<double> &values) {
  Stats s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= s.count;
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(var / s.count);
  return s;
}

json stats_json(const std::vector<double> &values) {
  const Stats s = stats_of(values);
  if (s.count == 0) return json{{"mean", nullptr}, {"std", nullptr}, {"count", 0}};
  return json{{"mean", s.mean}, {"std", s.stddev}, {"count", s.count}};
}

std::string speaker_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "spk%03d", index);
  return buf;
}

}  // namespace

std::string method_key(const MethodSpec &spec) {
  if (spec.method == TrainMethod::kReinforce) {
    return "reinforce_" + to_string(spec.reward);
  }
  return spec.method == TrainMethod::kImSeparate ? "im_separate" : "im_same";
}

std::vector<MethodSpec> default_methods() {
  return {
      {TrainMethod::kReinforce, RewardKind::kSimple},
      {TrainMethod::kReinforce, RewardKind::kReward},
      {TrainMethod::kReinforce, RewardKind::kPenalize},
      {TrainMethod::kReinforce, RewardKind::kTDcf},
      {TrainMethod::kImSeparate, RewardKind::kSimple},
      {TrainMethod::kImSame, RewardKind::kSimple},
  };
}

ExperimentConfig::ExperimentConfig() {
  pretrain.learning_rate = 0.05;
  pretrain.epochs = 15;
  // The tandem phase keeps the TrainConfig defaults (SGD 1e-4, batch 64,
  // 50 epochs).
}

void ExperimentConfig::validate() const {
  world.validate();
  asv_spec.validate();
  cm_spec.validate();
  pretrain.validate();
  tandem.validate();
  cost.validate();
  if (asv_spec.input_dim != world.embedding_dim ||
      cm_spec.input_dim != world.embedding_dim) {
    throw std::runtime_error(
        "network input dimension must match the world embedding dimension");
  }
  if (repetitions < 1) throw std::runtime_error("repetitions must be >= 1");
  if (pretrain_pairs < 1) {
    throw std::runtime_error("pretrain_pairs must be >= 1");
  }
  if (methods.empty()) throw std::runtime_error("no methods configured");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 over the combined value.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ExperimentResult run_experiment(const ExperimentConfig &config,
                                std::ostream &log) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);

  const World world = generate_world(config.world);
  const TrialList dev = build_trials(world, config.trials.dev, Partition::kDev,
                                     derive_seed(config.trials.seed, 1));
  const TrialList eval = build_trials(world, config.trials.eval,
                                      Partition::kEval,
                                      derive_seed(config.trials.seed, 2));

  json failures = json::array();
  std::vector<double> initial_dev_tdcf, initial_eval_tdcf;
  // Per method: repetition entries plus final/relative value collections.
  struct MethodAgg {
    json reps = json::array();
    std::vector<double> dev_final, eval_final, dev_rel, eval_rel;
  };
  std::vector<MethodAgg> agg(config.methods.size());
  bool any_failure = false;

  for (int rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t seed_label = config.base_seed + rep;
    const std::string seed_dir = "seed_" + std::to_string(seed_label);
    log << "[rep " << rep + 1 << "/" << config.repetitions << "] seed "
        << seed_label << "\n";

    TandemSystem initial;
    EvalRecord init_dev, init_eval;
    bool pretrained = false;
    std::string pretrain_error;
    try {
      PolicyNet asv =
          init_network(config.asv_spec, derive_seed(seed_label, 1));
      PolicyNet cm = init_network(config.cm_spec, derive_seed(seed_label, 2));
      const PairDataset asv_pairs = make_asv_pretrain_pairs(
          world, config.pretrain_pairs, derive_seed(seed_label, 3));
      const PairDataset cm_pairs = make_cm_pretrain_pairs(
          world, config.pretrain_pairs, derive_seed(seed_label, 4));
      TrainConfig pre = config.pretrain;
      pre.seed = derive_seed(seed_label, 5);
      initial.asv = pretrain(std::move(asv), asv_pairs, pre);
      pre.seed = derive_seed(seed_label, 6);
      initial.cm = pretrain(std::move(cm), cm_pairs, pre);

      init_dev = evaluate(initial, dev, config.cost);
      init_eval = evaluate(initial, eval, config.cost);

      const std::filesystem::path dir =
          config.output_dir / "initial" / seed_dir;
      std::filesystem::create_directories(dir);
      save_policy(initial.asv, dir / "asv.ckpt");
      save_policy(initial.cm, dir / "cm.ckpt");
      write_json_file(dir / "dev_eval.json", eval_record_json(init_dev));
      write_json_file(dir / "eval_eval.json", eval_record_json(init_eval));
      write_scores(dir / "scores_dev.txt", scored_trials(initial, dev));
      write_scores(dir / "scores_eval.txt", scored_trials(initial, eval));
      pretrained = true;
      initial_dev_tdcf.push_back(init_dev.tdcf_norm_min);
      initial_eval_tdcf.push_back(init_eval.tdcf_norm_min);
      log << "  pretrained: dev t-DCF " << init_dev.tdcf_norm_min
          << ", eval t-DCF " << init_eval.tdcf_norm_min << ", eval ASV EER "
          << init_eval.asv_eer << ", eval CM EER " << init_eval.cm_eer << "\n";
    } catch (const std::exception &e) {
      pretrain_error = e.what();
      any_failure = true;
    }

    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      const std::string key = method_key(config.methods[m]);
      if (!pretrained) {
        failures.push_back({{"method", key},
                            {"seed", seed_label},
                            {"stage", "pretrain"},
                            {"error", pretrain_error}});
        continue;
      }
      try {
        TrainConfig tc = config.tandem;
        tc.method = config.methods[m].method;
        tc.reward.kind = config.methods[m].reward;
        tc.reward.cost = config.cost;
        tc.seed = derive_seed(seed_label, 16 + m);
        RunResult run = run_tandem(initial, dev, eval, tc, config.cost);

        const std::filesystem::path dir =
            config.output_dir / "runs" / key / seed_dir;
        std::filesystem::create_directories(dir);
        write_epochs_csv(dir / "epochs.csv", run.epochs);
        write_json_file(dir / "final_dev.json",
                        eval_record_json(run.final_dev));
        write_json_file(dir / "final_eval.json",
                        eval_record_json(run.final_eval));
        write_scores(dir / "scores_dev.txt", scored_trials(run.system, dev));
        write_scores(dir / "scores_eval.txt", scored_trials(run.system, eval));
        save_policy(run.system.asv, dir / "asv.ckpt");
        save_policy(run.system.cm, dir / "cm.ckpt");

        const double dev_rel =
            100.0 * (run.final_dev.tdcf_norm_min - init_dev.tdcf_norm_min) /
            init_dev.tdcf_norm_min;
        const double eval_rel =
            100.0 * (run.final_eval.tdcf_norm_min - init_eval.tdcf_norm_min) /
            init_eval.tdcf_norm_min;
        agg[m].dev_final.push_back(run.final_dev.tdcf_norm_min);
        agg[m].eval_final.push_back(run.final_eval.tdcf_norm_min);
        agg[m].dev_rel.push_back(dev_rel);
        agg[m].eval_rel.push_back(eval_rel);
        agg[m].reps.push_back({{"seed", seed_label},
                               {"status", "ok"},
                               {"dev_tdcf_initial", init_dev.tdcf_norm_min},
                               {"dev_tdcf_final", run.final_dev.tdcf_norm_min},
                               {"dev_rel_pct", dev_rel},
                               {"eval_tdcf_initial", init_eval.tdcf_norm_min},
                               {"eval_tdcf_final",
                                run.final_eval.tdcf_norm_min},
                               {"eval_rel_pct", eval_rel}});
        log << "  " << key << ": eval t-DCF " << init_eval.tdcf_norm_min
            << " -> " << run.final_eval.tdcf_norm_min << " (" << eval_rel
            << "%)\n";
      } catch (const std::exception &e) {
        any_failure = true;
        failures.push_back({{"method", key},
                            {"seed", seed_label},
                            {"stage", "tandem"},
                            {"error", e.what()}});
        agg[m].reps.push_back(
            {{"seed", seed_label}, {"status", "failed"}, {"error", e.what()}});
        log << "  " << key << ": FAILED (" << e.what() << ")\n";
      }
    }
  }

  json methods_json = json::object();
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    const std::string key = method_key(config.methods[m]);
    methods_json[key] = {
        {"dev",
         {{"tdcf", stats_json(agg[m].dev_final)},
          {"rel_change_pct", stats_json(agg[m].dev_rel)}}},
        {"eval",
         {{"tdcf", stats_json(agg[m].eval_final)},
          {"rel_change_pct", stats_json(agg[m].eval_rel)}}},
        {"repetitions", agg[m].reps}};
  }

  json summary = {
      {"initial",
       {{"dev", {{"tdcf", stats_json(initial_dev_tdcf)}}},
        {"eval", {{"tdcf", stats_json(initial_eval_tdcf)}}}}},
      {"methods", methods_json},
      {"failures", failures},
      {"partial", any_failure},
      {"meta",
       {{"generated_at", iso_utc_now()}, {"config", config_json(config)}}}};

  ExperimentResult result;
  result.any_failure = any_failure;
  result.summary_path = config.output_dir / "summary.json";
  write_json_file(result.summary_path, summary);
  log << "summary written to " << result.summary_path.string() << "\n";
  return result;
}

std::vector<std::filesystem::path> cmd_synth(const ExperimentConfig &config,
                                             std::ostream &log) {
  config.validate();
  const std::filesystem::path dir = config.output_dir / "protocols";
  std::filesystem::create_directories(dir);

  const World world = generate_world(config.world);
  std::vector<std::filesystem::path> written;
  const std::pair<Partition, TrialCounts> partitions[] = {
      {Partition::kTrain, config.trials.train},
      {Partition::kDev, config.trials.dev},
      {Partition::kEval, config.trials.eval}};
  std::uint64_t stream = 0;
  for (const auto &[partition, counts] : partitions) {
    const TrialList list = build_trials(world, counts, partition,
                                        derive_seed(config.trials.seed, stream));
    ++stream;
    std::vector<ProtocolEntry> entries;
    entries.reserve(list.trials.size());
    for (const Trial &trial : list.trials) {
      entries.push_back({trial.id, speaker_name(trial.claimed_speaker),
                         class_of(trial.truth)});
    }
    const std::filesystem::path path = dir / (to_string(partition) + ".txt");
    write_protocol(path, entries);
    log << "wrote " << entries.size() << " trials to " << path.string()
        << "\n";
    written.push_back(path);
  }
  return written;
}

EvalRecord cmd_tdcf(const std::filesystem::path &score_file,
                    const CostModel &cost,
                    const std::filesystem::path &report_path,
                    std::ostream &log) {
  const std::vector<ScoredTrial> records = read_scores(score_file);
  if (records.empty()) {
    throw std::runtime_error("empty score file: " + score_file.string());
  }
  std::vector<double> asv_scores, cm_scores;
  std::vector<TrialClass> classes;
  for (const ScoredTrial &r : records) {
    asv_scores.push_back(r.asv_score);
    cm_scores.push_back(r.cm_score);
    classes.push_back(r.cls);
  }
  const EvalRecord record = evaluate_scores(asv_scores, cm_scores, classes, cost);

  char line[160];
  std::snprintf(line, sizeof(line), "ASV EER:         %7.4f%%  (threshold %g)",
                100.0 * record.asv_eer, record.asv_eer_threshold);
  log << line << "\n";
  std::snprintf(line, sizeof(line), "CM EER:          %7.4f%%  (threshold %g)",
                100.0 * record.cm_eer, record.cm_eer_threshold);
  log << line << "\n";
  std::snprintf(line, sizeof(line),
                "min t-DCF:       %7.4f  (CM threshold %g, ASV threshold %g)",
                record.tdcf_norm_min, record.tdcf_cm_threshold,
                record.tdcf_asv_threshold);
  log << line << "\n";

  if (!report_path.empty()) {
    if (report_path.has_parent_path()) {
      std::filesystem::create_directories(report_path.parent_path());
    }
    json report = {{"score_file", score_file.string()},
                   {"cost", cost_json(cost)},
                   {"result", eval_record_json(record)},
                   {"meta", {{"generated_at", iso_utc_now()}}}};
    write_json_file(report_path, report);
    log << "report written to " << report_path.string() << "\n";
  }
  return record;
}

std::vector<std::filesystem::path> cmd_det(
    const std::filesystem::path &score_file, const std::string &selector,
    const std::filesystem::path &out_dir) {
  if (selector != "asv" && selector != "cm" && selector != "both") {
    throw std::runtime_error("det selector must be asv, cm or both");
  }
  const std::vector<ScoredTrial> records = read_scores(score_file);
  if (records.empty()) {
    throw std::runtime_error("empty score file: " + score_file.string());
  }
  std::filesystem::create_directories(out_dir);

  auto write_curve = [&](const char *name, const std::vector<double> &scores,
                         const std::vector<int> &labels) {
    const DetCurve curve = det_points(scores, labels);
    const std::filesystem::path path =
        out_dir / (std::string("det_") + name + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "threshold,p_miss,p_fa\n";
    for (const DetPoint &p : curve) {
      out << csv_value(p.threshold) << ',' << csv_value(p.p_miss) << ','
          << csv_value(p.p_fa) << '\n';
    }
    return path;
  };

  std::vector<std::filesystem::path> written;
  if (selector == "asv" || selector == "both") {
    // Target vs nontarget on the ASV scores; spoof trials excluded.
    std::vector<double> scores;
    std::vector<int> labels;
    for (const ScoredTrial &r : records) {
      if (r.cls == TrialClass::kSpoof) continue;
      scores.push_back(r.asv_score);
      labels.push_back(r.cls == TrialClass::kTarget ? 1 : 0);
    }
    written.push_back(write_curve("asv", scores, labels));
  }
  if (selector == "cm" || selector == "both") {
    // Bona fide vs spoof on the CM scores.
    std::vector<double> scores;
    std::vector<int> labels;
    for (const ScoredTrial &r : records) {
      scores.push_back(r.cm_score);
      labels.push_back(r.cls == TrialClass::kSpoof ? 0 : 1);
    }
    written.push_back(write_curve("cm", scores, labels));
  }
  return written;
}

}  // namespace tandem
