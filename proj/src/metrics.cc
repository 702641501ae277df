// src/metrics.cc

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

#include "tandem/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tandem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_same_size(std::size_t a, std::size_t b, const char *what) {
  if (a != b) {
    throw std::runtime_error(std::string("size mismatch between scores and ") +
                             what);
  }
}

}  // namespace

std::string to_string(TrialClass cls) {
  switch (cls) {
    case TrialClass::kTarget:
      return "target";
    case TrialClass::kNontarget:
      return "nontarget";
    default:
      return "spoof";
  }
}

TrialClass trial_class_from_string(const std::string &name) {
  if (name == "target") return TrialClass::kTarget;
  if (name == "nontarget") return TrialClass::kNontarget;
  if (name == "spoof") return TrialClass::kSpoof;
  throw std::runtime_error("unknown trial class '" + name + "'");
}

void CostModel::validate() const {
  if (!(c_miss > 0.0) || !(c_fa > 0.0) || !(c_fa_spoof > 0.0)) {
    throw std::runtime_error("cost model: all costs must be positive");
  }
  for (double rho : {rho_tar, rho_non, rho_spoof}) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
      throw std::runtime_error("cost model: priors must lie in [0, 1]");
    }
  }
  if (std::abs(rho_tar + rho_non + rho_spoof - 1.0) > 1e-12) {
    throw std::runtime_error("cost model: priors must sum to 1");
  }
}

std::vector<double> decision_boundaries(std::span<const double> scores) {
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<double> boundaries;
  boundaries.reserve(sorted.size() + 1);
  boundaries.push_back(-kInf);
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    boundaries.push_back(0.5 * (sorted[i] + sorted[i + 1]));
  }
  boundaries.push_back(kInf);
  return boundaries;
}

BinaryRates error_rates_at(std::span<const double> scores,
                           std::span<const int> labels, double threshold) {
  check_same_size(scores.size(), labels.size(), "labels");
  std::size_t num_pos = 0, num_neg = 0, misses = 0, false_alarms = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) {
      ++num_pos;
      if (scores[i] < threshold) ++misses;
    } else {
      ++num_neg;
      if (scores[i] >= threshold) ++false_alarms;
    }
  }
  if (num_pos == 0 || num_neg == 0) {
    throw std::runtime_error("degenerate trial set: a class is empty");
  }
  return {static_cast<double>(misses) / static_cast<double>(num_pos),
          static_cast<double>(false_alarms) / static_cast<double>(num_neg)};
}

double dcf(const BinaryRates &rates, const CostModel &cost) {
  return cost.rho_tar * cost.c_miss * rates.p_miss +
         cost.rho_non * cost.c_fa * rates.p_fa;
}

EerResult compute_eer(std::span<const double> scores,
                      std::span<const int> labels) {
  check_same_size(scores.size(), labels.size(), "labels");
  const std::vector<double> boundaries = decision_boundaries(scores);

  EerResult best;
  double best_diff = kInf;
  double best_sum = kInf;
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    const BinaryRates rates = error_rates_at(scores, labels, boundaries[i]);
    const double diff = std::abs(rates.p_miss - rates.p_fa);
    const double sum = rates.p_miss + rates.p_fa;
    // Increasing threshold order, so strict comparisons keep the lowest
    // threshold among ties.
    if (diff < best_diff || (diff == best_diff && sum < best_sum)) {
      best_diff = diff;
      best_sum = sum;
      best.eer = 0.5 * sum;
      best.threshold = boundaries[i];
      best.boundary_index = i;
    }
  }
  return best;
}

namespace {

struct ClassCounts {
  std::size_t targets = 0, nontargets = 0, spoofs = 0;
};

ClassCounts count_classes(std::span<const TrialClass> classes) {
  ClassCounts counts;
  for (TrialClass cls : classes) {
    switch (cls) {
      case TrialClass::kTarget:
        ++counts.targets;
        break;
      case TrialClass::kNontarget:
        ++counts.nontargets;
        break;
      case TrialClass::kSpoof:
        ++counts.spoofs;
        break;
    }
  }
  return counts;
}

void require_all_classes(const ClassCounts &counts) {
  if (counts.targets == 0 || counts.nontargets == 0 || counts.spoofs == 0) {
    throw std::runtime_error("class absent from trial set");
  }
}

// Composes the four tandem rates from per-class reject/accept counts. Kept
// as the single source of the arithmetic so the sweep in min_norm_tdcf and
// tandem_rates() produce bit-identical values for identical counts.
TandemRates compose_rates(const ClassCounts &n, std::size_t asv_rej_tar,
                          std::size_t asv_acc_non, std::size_t asv_acc_spoof,
                          std::size_t cm_rej_tar, std::size_t cm_rej_non,
                          std::size_t cm_acc_spoof) {
  TandemRates r;
  r.asv_miss_tar =
      static_cast<double>(asv_rej_tar) / static_cast<double>(n.targets);
  r.asv_fa_non =
      static_cast<double>(asv_acc_non) / static_cast<double>(n.nontargets);
  r.asv_fa_spoof =
      static_cast<double>(asv_acc_spoof) / static_cast<double>(n.spoofs);
  r.cm_miss_tar =
      static_cast<double>(cm_rej_tar) / static_cast<double>(n.targets);
  r.cm_miss_non =
      static_cast<double>(cm_rej_non) / static_cast<double>(n.nontargets);
  r.cm_fa_spoof =
      static_cast<double>(cm_acc_spoof) / static_cast<double>(n.spoofs);
  r.p_a = (1.0 - r.cm_miss_tar) * r.asv_miss_tar;
  r.p_b = (1.0 - r.cm_miss_non) * r.asv_fa_non;
  r.p_c = r.cm_fa_spoof * r.asv_fa_spoof;
  r.p_d = r.cm_miss_tar;
  return r;
}

}  // namespace

TandemRates tandem_rates(std::span<const double> asv_scores,
                         std::span<const double> cm_scores,
                         std::span<const TrialClass> classes,
                         double asv_threshold, double cm_threshold,
                         TandemComposition mode) {
  check_same_size(asv_scores.size(), cm_scores.size(), "cm scores");
  check_same_size(asv_scores.size(), classes.size(), "classes");
  const ClassCounts n = count_classes(classes);
  require_all_classes(n);

  std::size_t asv_rej_tar = 0, asv_acc_non = 0, asv_acc_spoof = 0;
  std::size_t cm_rej_tar = 0, cm_rej_non = 0, cm_acc_spoof = 0;
  std::size_t joint_a = 0, joint_b = 0, joint_c = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const bool asv_accept = asv_scores[i] >= asv_threshold;
    const bool cm_accept = cm_scores[i] >= cm_threshold;
    switch (classes[i]) {
      case TrialClass::kTarget:
        if (!asv_accept) ++asv_rej_tar;
        if (!cm_accept) ++cm_rej_tar;
        if (cm_accept && !asv_accept) ++joint_a;
        break;
      case TrialClass::kNontarget:
        if (asv_accept) ++asv_acc_non;
        if (!cm_accept) ++cm_rej_non;
        if (cm_accept && asv_accept) ++joint_b;
        break;
      case TrialClass::kSpoof:
        if (asv_accept) ++asv_acc_spoof;
        if (cm_accept) ++cm_acc_spoof;
        if (cm_accept && asv_accept) ++joint_c;
        break;
    }
  }

  TandemRates r = compose_rates(n, asv_rej_tar, asv_acc_non, asv_acc_spoof,
                                cm_rej_tar, cm_rej_non, cm_acc_spoof);
  if (mode == TandemComposition::kJointCounts) {
    r.p_a = static_cast<double>(joint_a) / static_cast<double>(n.targets);
    r.p_b = static_cast<double>(joint_b) / static_cast<double>(n.nontargets);
    r.p_c = static_cast<double>(joint_c) / static_cast<double>(n.spoofs);
  }
  return r;
}

double tdcf(const TandemRates &rates, const CostModel &cost) {
  return cost.c_miss * cost.rho_tar * (rates.p_a + rates.p_d) +
         cost.c_fa * cost.rho_non * rates.p_b +
         cost.c_fa_spoof * cost.rho_spoof * rates.p_c;
}

MinTdcfResult min_norm_tdcf(std::span<const double> asv_scores,
                            std::span<const double> cm_scores,
                            std::span<const TrialClass> classes,
                            const CostModel &cost) {
  check_same_size(asv_scores.size(), cm_scores.size(), "cm scores");
  check_same_size(asv_scores.size(), classes.size(), "classes");
  cost.validate();
  const ClassCounts n = count_classes(classes);
  require_all_classes(n);

  // ASV operating point: equal error rate over target/nontarget trials only.
  std::vector<double> bona_scores;
  std::vector<int> bona_labels;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == TrialClass::kTarget) {
      bona_scores.push_back(asv_scores[i]);
      bona_labels.push_back(1);
    } else if (classes[i] == TrialClass::kNontarget) {
      bona_scores.push_back(asv_scores[i]);
      bona_labels.push_back(0);
    }
  }
  const double asv_threshold = compute_eer(bona_scores, bona_labels).threshold;

  // Fixed ASV marginals at that threshold.
  std::size_t asv_rej_tar = 0, asv_acc_non = 0, asv_acc_spoof = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const bool accept = asv_scores[i] >= asv_threshold;
    switch (classes[i]) {
      case TrialClass::kTarget:
        if (!accept) ++asv_rej_tar;
        break;
      case TrialClass::kNontarget:
        if (accept) ++asv_acc_non;
        break;
      case TrialClass::kSpoof:
        if (accept) ++asv_acc_spoof;
        break;
    }
  }

  // Sweep CM boundaries in increasing order, flipping trials to rejected as
  // the threshold passes their score.
  std::vector<std::size_t> order(classes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cm_scores[a] < cm_scores[b];
  });
  const std::vector<double> boundaries = decision_boundaries(cm_scores);

  MinTdcfResult result;
  result.asv_threshold = asv_threshold;
  std::size_t cm_rej_tar = 0, cm_rej_non = 0, cm_rej_spoof = 0;
  std::size_t next = 0;
  double best = kInf;
  for (double boundary : boundaries) {
    while (next < order.size() && cm_scores[order[next]] < boundary) {
      switch (classes[order[next]]) {
        case TrialClass::kTarget:
          ++cm_rej_tar;
          break;
        case TrialClass::kNontarget:
          ++cm_rej_non;
          break;
        case TrialClass::kSpoof:
          ++cm_rej_spoof;
          break;
      }
      ++next;
    }
    const TandemRates rates =
        compose_rates(n, asv_rej_tar, asv_acc_non, asv_acc_spoof, cm_rej_tar,
                      cm_rej_non, n.spoofs - cm_rej_spoof);
    const double value = tdcf(rates, cost);
    if (boundary == -kInf) result.normalizer = value;
    if (value < best) {
      best = value;
      result.cm_threshold = boundary;
    }
  }

  if (result.normalizer == 0.0) {
    throw std::runtime_error(
        "degenerate normalizer: accept-all CM has zero t-DCF");
  }
  result.min_tdcf = best;
  result.value = best / result.normalizer;
  if (result.value > 1.0 && result.value < 1.0 + 1e-9) result.value = 1.0;
  return result;
}

DetCurve det_points(std::span<const double> scores,
                    std::span<const int> labels) {
  check_same_size(scores.size(), labels.size(), "labels");
  DetCurve curve;
  for (double boundary : decision_boundaries(scores)) {
    const BinaryRates rates = error_rates_at(scores, labels, boundary);
    curve.push_back({boundary, rates.p_miss, rates.p_fa});
  }
  return curve;
}

}  // namespace tandem
