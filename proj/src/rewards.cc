// src/rewards.cc

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

#include "tandem/rewards.h"

#include <stdexcept>

namespace tandem {

double reward(const RewardModel &model, int a_tandem,
              const GroundTruth &truth) {
  const bool correct = a_tandem == tandem_label(truth);
  switch (model.kind) {
    case RewardKind::kSimple:
      return correct ? 1.0 : -1.0;
    case RewardKind::kReward:
      return correct ? 1.0 : 0.0;
    case RewardKind::kPenalize:
      return correct ? 0.0 : -1.0;
    case RewardKind::kTDcf:
      break;
  }
  const CostModel &cost = model.cost;
  switch (class_of(truth)) {
    case TrialClass::kTarget:
      return a_tandem == 1 ? 0.0 : -cost.c_miss * cost.rho_tar;
    case TrialClass::kNontarget:
      return a_tandem == 1 ? -cost.c_fa * cost.rho_non : 0.0;
    default:
      return a_tandem == 1 ? -cost.c_fa_spoof * cost.rho_spoof : 0.0;
  }
}

std::string to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::kSimple:
      return "simple";
    case RewardKind::kReward:
      return "reward";
    case RewardKind::kPenalize:
      return "penalize";
    default:
      return "tdcf";
  }
}

RewardKind reward_kind_from_string(const std::string &name) {
  if (name == "simple") return RewardKind::kSimple;
  if (name == "reward") return RewardKind::kReward;
  if (name == "penalize") return RewardKind::kPenalize;
  if (name == "tdcf") return RewardKind::kTDcf;
  throw std::runtime_error("unknown reward model '" + name + "'");
}

}  // namespace tandem
