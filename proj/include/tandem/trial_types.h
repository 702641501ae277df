// include/tandem/trial_types.h

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

#ifndef TANDEM_TRIAL_TYPES_H_
#define TANDEM_TRIAL_TYPES_H_

#include <string>

namespace tandem {

// Trial classes of a spoofing-aware verification protocol.
enum class TrialClass { kTarget, kNontarget, kSpoof };

// Per-trial ground truth for the two subsystems.
//   asv_label: 1 = test utterance belongs to the claimed speaker
//   cm_label:  1 = test utterance is bona fide speech
// Class mapping: target = (1,1), nontarget = (0,1), spoof = (*,0).
// Spoof trials use the claimed-speaker convention, so asv_label = 1.
struct GroundTruth {
  int asv_label = 0;
  int cm_label = 0;
};

inline TrialClass class_of(const GroundTruth &truth) {
  if (truth.cm_label == 0) return TrialClass::kSpoof;
  return truth.asv_label == 1 ? TrialClass::kTarget : TrialClass::kNontarget;
}

inline GroundTruth truth_of(TrialClass cls) {
  switch (cls) {
    case TrialClass::kTarget:
      return {1, 1};
    case TrialClass::kNontarget:
      return {0, 1};
    default:
      return {1, 0};
  }
}

// The label a tandem (ASV AND CM) decision is scored against.
inline int tandem_label(const GroundTruth &truth) {
  return (truth.asv_label == 1 && truth.cm_label == 1) ? 1 : 0;
}

std::string to_string(TrialClass cls);

// Parses "target" / "nontarget" / "spoof"; throws std::runtime_error on
// anything else.
TrialClass trial_class_from_string(const std::string &name);

}  // namespace tandem

#endif  // TANDEM_TRIAL_TYPES_H_
