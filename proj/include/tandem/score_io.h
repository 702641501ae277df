// include/tandem/score_io.h

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

#ifndef TANDEM_SCORE_IO_H_
#define TANDEM_SCORE_IO_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tandem/trial_types.h"

namespace tandem {

// Plain-text exchange formats, UTF-8, space separated, one record per line,
// no header. They let external systems be scored with the same t-DCF
// machinery used for the built-in networks.

// Score file line: <trial_id> <class> <asv_score> <cm_score>
struct ScoredTrial {
  std::string id;
  TrialClass cls = TrialClass::kTarget;
  double asv_score = 0.0;
  double cm_score = 0.0;
};

// Protocol file line: <trial_id> <speaker_id> <class>
struct ProtocolEntry {
  std::string id;
  std::string speaker;
  TrialClass cls = TrialClass::kTarget;
};

// Scores are written with enough digits to round-trip exactly.
void write_scores(const std::filesystem::path &path,
                  std::span<const ScoredTrial> records);

// Throws std::runtime_error naming the line number and offending field on
// any malformed input.
std::vector<ScoredTrial> read_scores(const std::filesystem::path &path);

void write_protocol(const std::filesystem::path &path,
                    std::span<const ProtocolEntry> entries);

// Duplicate trial ids are an error naming the id. An empty file is a valid,
// empty protocol.
std::vector<ProtocolEntry> parse_protocol(const std::filesystem::path &path);

}  // namespace tandem

#endif  // TANDEM_SCORE_IO_H_
