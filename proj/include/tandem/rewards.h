// include/tandem/rewards.h

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

#ifndef TANDEM_REWARDS_H_
#define TANDEM_REWARDS_H_

#include <string>

#include "tandem/metrics.h"
#include "tandem/trial_types.h"

namespace tandem {

// The four reward functions for tandem training. A decision is correct when
// the tandem action equals (asv_label AND cm_label).
//   kSimple:   +1 correct, -1 incorrect
//   kReward:   +1 correct,  0 incorrect
//   kPenalize:  0 correct, -1 incorrect
//   kTDcf:     per-trial negative detection cost; never positive
enum class RewardKind { kSimple, kReward, kPenalize, kTDcf };

struct RewardModel {
  RewardKind kind = RewardKind::kSimple;
  CostModel cost;  // used by kTDcf only
};

// Reward for taking tandem action a_tandem on a trial with the given truth.
// The t-DCF variant charges, per class:
//   target:    0 if accepted, -c_miss * rho_tar if rejected
//   nontarget: -c_fa * rho_non if accepted, 0 if rejected
//   spoof:     -c_fa_spoof * rho_spoof if accepted, 0 if rejected
double reward(const RewardModel &model, int a_tandem,
              const GroundTruth &truth);

std::string to_string(RewardKind kind);
RewardKind reward_kind_from_string(const std::string &name);

}  // namespace tandem

#endif  // TANDEM_REWARDS_H_
