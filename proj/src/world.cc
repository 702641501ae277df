// src/world.cc

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

#include "tandem/world.h"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "tandem/policy.h"

namespace tandem {

void WorldConfig::validate() const {
  if (num_speakers < 2) {
    throw std::runtime_error("world needs at least two speakers");
  }
  if (embedding_dim <= 0 || utterances_per_speaker <= 0) {
    throw std::runtime_error("world dimensions must be positive");
  }
  if (!(speaker_spread > 0.0) || !(utterance_noise > 0.0)) {
    throw std::runtime_error("world spreads must be positive");
  }
  if (spoof_offset < 0.0) {
    throw std::runtime_error("spoof offset must be non-negative");
  }
  if (asv_spoof_visibility < 0.0 || asv_spoof_visibility > 1.0) {
    throw std::runtime_error("asv_spoof_visibility must lie in [0, 1]");
  }
}

int World::enroll_count() const {
  const int count = config.utterances_per_speaker / 4;
  return count > 0 ? count : 1;
}

int World::num_test_utterances() const {
  return config.utterances_per_speaker - enroll_count();
}

std::vector<double> World::enrollment_mean(int speaker) const {
  const int n = enroll_count();
  std::vector<double> mean(config.embedding_dim, 0.0);
  for (int u = 0; u < n; ++u) {
    for (int d = 0; d < config.embedding_dim; ++d) {
      mean[d] += bonafide[speaker][u][d];
    }
  }
  for (double &v : mean) v /= n;
  return mean;
}

World generate_world(const WorldConfig &config) {
  config.validate();
  if (config.utterances_per_speaker < 2) {
    throw std::runtime_error(
        "need at least two utterances per speaker (enrollment + test)");
  }

  World world;
  world.config = config;
  Rng rng(config.seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);

  auto draw_vector = [&](double scale, const std::vector<double> *center,
                         const std::vector<double> *offset) {
    std::vector<double> v(config.embedding_dim);
    for (int d = 0; d < config.embedding_dim; ++d) {
      double value = scale * unit_normal(rng);
      if (center != nullptr) value += (*center)[d];
      if (offset != nullptr) value += (*offset)[d];
      v[d] = value;
    }
    return v;
  };

  for (int s = 0; s < config.num_speakers; ++s) {
    world.speaker_means.push_back(
        draw_vector(config.speaker_spread, nullptr, nullptr));
  }

  // One fixed displacement direction for all spoofed audio in this world.
  world.spoof_direction = draw_vector(1.0, nullptr, nullptr);
  double norm = 0.0;
  for (double v : world.spoof_direction) norm += v * v;
  norm = std::sqrt(norm);
  for (double &v : world.spoof_direction) v /= norm;

  std::vector<double> spoof_shift(config.embedding_dim);
  for (int d = 0; d < config.embedding_dim; ++d) {
    spoof_shift[d] = world.spoof_direction[d] * config.spoof_offset;
  }

  for (int s = 0; s < config.num_speakers; ++s) {
    std::vector<std::vector<double>> bona, spoof;
    for (int u = 0; u < config.utterances_per_speaker; ++u) {
      bona.push_back(draw_vector(config.utterance_noise,
                                 &world.speaker_means[s], nullptr));
    }
    for (int u = 0; u < config.utterances_per_speaker; ++u) {
      spoof.push_back(draw_vector(config.utterance_noise,
                                  &world.speaker_means[s], &spoof_shift));
    }
    world.bonafide.push_back(std::move(bona));
    world.spoofed.push_back(std::move(spoof));
  }
  return world;
}

std::string to_string(Partition partition) {
  switch (partition) {
    case Partition::kTrain:
      return "train";
    case Partition::kDev:
      return "dev";
    default:
      return "eval";
  }
}

std::vector<int> partition_speakers(const World &world, Partition partition) {
  const int n = world.config.num_speakers;
  const int split = n / 2;
  std::vector<int> speakers;
  if (partition == Partition::kEval) {
    for (int s = split; s < n; ++s) speakers.push_back(s);
  } else {
    for (int s = 0; s < split; ++s) speakers.push_back(s);
  }
  return speakers;
}

std::vector<double> bonafide_anchor(const World &world) {
  const std::vector<int> speakers = partition_speakers(world, Partition::kTrain);
  std::vector<double> anchor(world.config.embedding_dim, 0.0);
  std::size_t count = 0;
  for (int s : speakers) {
    for (const std::vector<double> &utt : world.bonafide[s]) {
      for (int d = 0; d < world.config.embedding_dim; ++d) anchor[d] += utt[d];
      ++count;
    }
  }
  for (double &v : anchor) v /= static_cast<double>(count);
  return anchor;
}

TrialList build_trials(const World &world, const TrialCounts &counts,
                       Partition partition, std::uint64_t seed) {
  if (counts.targets < 1 || counts.nontargets < 1 || counts.spoofs < 1) {
    throw std::runtime_error("each trial class needs at least one trial");
  }
  const std::vector<int> speakers = partition_speakers(world, partition);
  if (speakers.size() < 2) {
    throw std::runtime_error(
        "partition has fewer speakers than trial construction requires");
  }

  const std::vector<double> anchor = bonafide_anchor(world);
  std::vector<std::vector<double>> enroll_means;
  enroll_means.reserve(speakers.size());
  for (int s : speakers) enroll_means.push_back(world.enrollment_mean(s));

  Rng rng(seed);
  std::uniform_int_distribution<int> pick_speaker(
      0, static_cast<int>(speakers.size()) - 1);
  std::uniform_int_distribution<int> pick_test(
      world.enroll_count(), world.config.utterances_per_speaker - 1);
  std::uniform_int_distribution<int> pick_spoof(
      0, world.config.utterances_per_speaker - 1);

  TrialList list;
  list.partition = partition;
  const std::string prefix = to_string(partition);
  char id[64];

  // The ASV front-end sees only asv_spoof_visibility of the artifact
  // displacement; 1 - visibility of the offset is subtracted back out.
  const double hidden = 1.0 - world.config.asv_spoof_visibility;
  auto asv_view = [&world, hidden](const std::vector<double> &cm_view) {
    std::vector<double> view = cm_view;
    for (int d = 0; d < world.config.embedding_dim; ++d) {
      view[d] -= hidden * world.config.spoof_offset * world.spoof_direction[d];
    }
    return view;
  };

  for (int i = 0; i < counts.targets; ++i) {
    const int k = pick_speaker(rng);
    std::snprintf(id, sizeof(id), "%s_tar_%05d", prefix.c_str(), i);
    const std::vector<double> &test = world.bonafide[speakers[k]][pick_test(rng)];
    list.trials.push_back({id, enroll_means[k], test, test, anchor,
                           truth_of(TrialClass::kTarget), speakers[k]});
  }
  for (int i = 0; i < counts.nontargets; ++i) {
    const int claimed = pick_speaker(rng);
    int other = pick_speaker(rng);
    while (other == claimed) other = pick_speaker(rng);
    std::snprintf(id, sizeof(id), "%s_non_%05d", prefix.c_str(), i);
    const std::vector<double> &test =
        world.bonafide[speakers[other]][pick_test(rng)];
    list.trials.push_back({id, enroll_means[claimed], test, test, anchor,
                           truth_of(TrialClass::kNontarget),
                           speakers[claimed]});
  }
  for (int i = 0; i < counts.spoofs; ++i) {
    const int k = pick_speaker(rng);
    std::snprintf(id, sizeof(id), "%s_spf_%05d", prefix.c_str(), i);
    const std::vector<double> &test = world.spoofed[speakers[k]][pick_spoof(rng)];
    list.trials.push_back({id, enroll_means[k], test, asv_view(test), anchor,
                           truth_of(TrialClass::kSpoof), speakers[k]});
  }
  return list;
}

}  // namespace tandem
