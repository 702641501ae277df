// include/tandem/world.h

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

#ifndef TANDEM_WORLD_H_
#define TANDEM_WORLD_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tandem/trial_types.h"

namespace tandem {

// Synthetic embedding world standing in for real speech corpora. Speaker
// means are drawn from an isotropic Gaussian scaled by speaker_spread;
// bona fide utterances scatter around their speaker mean with
// utterance_noise; spoofed utterances scatter around the speaker mean
// displaced by spoof_offset along one fixed random unit direction shared by
// the whole world. spoof_offset = 0 makes spoofs indistinguishable from
// bona fide speech.
//
// The two systems may see heterogeneous front-end views of the same spoofed
// utterance: the ASV view keeps only asv_spoof_visibility of the artifact
// displacement. The default of 0 models attacks that mimic the claimed
// speaker perfectly as far as the speaker front-end is concerned, while the
// countermeasure front-end exposes the artifacts; 1 gives both systems the
// identical embedding.
struct WorldConfig {
  int num_speakers = 500;
  int embedding_dim = 24;
  double speaker_spread = 2.75;
  double utterance_noise = 1.0;
  double spoof_offset = 10.0;
  double asv_spoof_visibility = 0.0;
  int utterances_per_speaker = 30;
  std::uint64_t seed = 7;

  void validate() const;
};

struct World {
  WorldConfig config;
  std::vector<std::vector<double>> speaker_means;             // [spk][dim]
  std::vector<std::vector<std::vector<double>>> bonafide;     // [spk][utt][dim]
  std::vector<std::vector<std::vector<double>>> spoofed;      // [spk][utt][dim]
  std::vector<double> spoof_direction;                        // unit vector

  // The first enroll_count() bona fide utterances of each speaker are held
  // out for enrollment; the rest are test material.
  int enroll_count() const;
  int num_test_utterances() const;
  std::vector<double> enrollment_mean(int speaker) const;
};

World generate_world(const WorldConfig &config);

enum class Partition { kTrain, kDev, kEval };

std::string to_string(Partition partition);

// Speakers are split in half: train/dev partitions draw from the lower
// half, eval from the upper half, so eval speakers are disjoint from the
// speakers any training stage saw.
std::vector<int> partition_speakers(const World &world, Partition partition);

// Mean of all bona fide utterances of the train-split speakers; the CM's
// fixed second input.
std::vector<double> bonafide_anchor(const World &world);

struct Trial {
  std::string id;
  std::vector<double> enroll;    // ASV first input: claimed-speaker enrollment
  std::vector<double> test;      // test utterance, CM front-end view
  std::vector<double> test_asv;  // test utterance, ASV front-end view
  std::vector<double> anchor;  // CM second input: average bona fide embedding
  GroundTruth truth;
  int claimed_speaker = -1;  // world speaker index of the claimed identity
};

struct TrialCounts {
  int targets = 0;
  int nontargets = 0;
  int spoofs = 0;
};

struct TrialList {
  Partition partition = Partition::kDev;
  std::vector<Trial> trials;
};

// Target trials pair a speaker's enrollment mean with one of that speaker's
// own bona fide test utterances; nontarget trials with another speaker's
// bona fide utterance; spoof trials with a spoofed utterance of the claimed
// speaker. Throws when a requested class count is below one or the speaker
// pool is too small (nontargets need at least two speakers).
TrialList build_trials(const World &world, const TrialCounts &counts,
                       Partition partition, std::uint64_t seed);

}  // namespace tandem

#endif  // TANDEM_WORLD_H_
