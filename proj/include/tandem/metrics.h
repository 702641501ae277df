// include/tandem/metrics.h

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

#ifndef TANDEM_METRICS_H_
#define TANDEM_METRICS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "tandem/trial_types.h"

namespace tandem {

// Decision convention used throughout this project:
//   score >= threshold  =>  ACCEPT
// All error rates are hard counts divided by the class size.

// Cost/prior parameters of the detection cost functions. The defaults are
// the ASVspoof19-style evaluation parameters: C_miss = 1,
// C_fa = C_fa_spoof = 10, rho_tar = 0.95 * 0.99, rho_non = 0.95 * 0.01,
// rho_spoof = 0.05.
struct CostModel {
  double c_miss = 1.0;
  double c_fa = 10.0;
  double c_fa_spoof = 10.0;
  double rho_tar = 0.95 * 0.99;
  double rho_non = 0.95 * 0.01;
  double rho_spoof = 0.05;

  // Throws std::runtime_error unless all costs are positive, every prior is
  // in [0, 1] and the priors sum to 1 within 1e-12.
  void validate() const;
};

// Miss / false-alarm rates of one binary system at one threshold.
struct BinaryRates {
  double p_miss = 0.0;
  double p_fa = 0.0;
};

// The four composed error rates of a parallel ASV+CM tandem, plus the
// per-system, per-class marginals they are composed from. Composition is
// product-of-marginals (CM and ASV decisions treated as independent):
//   p_a = (1 - cm_miss_tar) * asv_miss_tar   target passed CM, missed by ASV
//   p_b = (1 - cm_miss_non) * asv_fa_non     nontarget accepted by both
//   p_c = cm_fa_spoof * asv_fa_spoof         spoof accepted by both
//   p_d = cm_miss_tar                        target rejected by CM
struct TandemRates {
  double p_a = 0.0, p_b = 0.0, p_c = 0.0, p_d = 0.0;
  double asv_miss_tar = 0.0;  // P(ASV reject | target)
  double asv_fa_non = 0.0;    // P(ASV accept | nontarget)
  double asv_fa_spoof = 0.0;  // P(ASV accept | spoof)
  double cm_miss_tar = 0.0;   // P(CM reject | target)
  double cm_miss_non = 0.0;   // P(CM reject | nontarget)
  double cm_fa_spoof = 0.0;   // P(CM accept | spoof)
};

struct DetPoint {
  double threshold = 0.0;
  double p_miss = 0.0;
  double p_fa = 0.0;
};

// Ordered by threshold; p_miss non-decreasing, p_fa non-increasing. The
// first point is the accept-all boundary (-inf, 0, 1) and the last the
// reject-all boundary (+inf, 1, 0).
using DetCurve = std::vector<DetPoint>;

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
  // Index into decision_boundaries() of the chosen operating point; stable
  // under strictly increasing transforms of the scores.
  std::size_t boundary_index = 0;
};

struct MinTdcfResult {
  double value = 0.0;  // normalized minimum t-DCF
  double cm_threshold = 0.0;
  double asv_threshold = 0.0;
  double min_tdcf = 0.0;     // unnormalized minimum
  double normalizer = 0.0;   // t-DCF of the accept-all CM at the ASV EER point
};

enum class TandemComposition {
  kProductOfMarginals,  // the evaluation definition
  kJointCounts,         // diagnostics only
};

// All candidate decision boundaries for a score set: -inf (accept all),
// the midpoints of consecutive sorted unique scores, +inf (reject all).
std::vector<double> decision_boundaries(std::span<const double> scores);

// Hard-count error rates at one threshold. labels: 1 = positive class
// (counts toward p_miss), 0 = negative (counts toward p_fa). Throws if
// either class is empty ("degenerate trial set").
BinaryRates error_rates_at(std::span<const double> scores,
                           std::span<const int> labels, double threshold);

// rho_tar * c_miss * p_miss + rho_non * c_fa * p_fa. For the plain
// two-class DCF the caller supplies rho_non = 1 - rho_tar.
double dcf(const BinaryRates &rates, const CostModel &cost);

// Empirical equal error rate. Sweeps every decision boundary, picks the one
// minimizing |p_miss - p_fa| (ties: smaller p_miss + p_fa, then lower
// threshold) and reports (p_miss + p_fa) / 2 there. Throws if either class
// is empty.
EerResult compute_eer(std::span<const double> scores,
                      std::span<const int> labels);

// Per-class marginal error rates of both systems at fixed thresholds,
// composed into the four tandem rates. Every class must occur at least once
// ("class absent from trial set" otherwise).
TandemRates tandem_rates(
    std::span<const double> asv_scores, std::span<const double> cm_scores,
    std::span<const TrialClass> classes, double asv_threshold,
    double cm_threshold,
    TandemComposition mode = TandemComposition::kProductOfMarginals);

// c_miss * rho_tar * (p_a + p_d) + c_fa * rho_non * p_b
//   + c_fa_spoof * rho_spoof * p_c
double tdcf(const TandemRates &rates, const CostModel &cost);

// Minimum normalized t-DCF. Fixes the ASV threshold at its equal error rate
// computed on target-vs-nontarget trials only, sweeps every CM decision
// boundary, and divides the minimum t-DCF by the t-DCF of the accept-all CM
// at the same ASV threshold. Ties in the sweep resolve to the lowest CM
// threshold. Values above 1 by less than 1e-9 are clamped to 1; anything
// larger would be reported verbatim. Throws "degenerate normalizer" when
// the accept-all reference cost is zero.
MinTdcfResult min_norm_tdcf(std::span<const double> asv_scores,
                            std::span<const double> cm_scores,
                            std::span<const TrialClass> classes,
                            const CostModel &cost);

// One DET point per decision boundary, in threshold order.
DetCurve det_points(std::span<const double> scores,
                    std::span<const int> labels);

}  // namespace tandem

#endif  // TANDEM_METRICS_H_
