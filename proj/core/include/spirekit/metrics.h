/*
 * Copyright 2026 The spirekit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SPIREKIT_METRICS_H_
#define SPIREKIT_METRICS_H_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spirekit/dataset.h"
#include "spirekit/identify.h"

namespace spirekit {

struct PredictionRecord {
  std::string id;
  Split split = Split::kBoth;
  bool label = false;  // presence of Main
  double score = 0.0;  // in [0, 1]
  bool natural = true;
};

// Throws InvalidArgument if label disagrees with split or score is outside
// [0, 1].
void ValidatePrediction(const PredictionRecord& p);

// Below this many natural examples a split's accuracy is reported with a
// warning.
inline constexpr std::size_t kMinReliableSplitSize = 30;

struct SplitAccuracies {
  double threshold = kDefaultDecisionThreshold;
  std::array<double, 4> accuracy{};
  std::array<std::size_t, 4> n{};

  double operator[](Split s) const { return accuracy[Index(s)]; }
};

// Fraction of correct binarized predictions per split, natural records
// only. Throws EmptySplit naming every split without natural predictions.
// Splits smaller than kMinReliableSplitSize add a message to `warnings`.
SplitAccuracies PerSplitAccuracy(std::span<const PredictionRecord> preds,
                                 double threshold = kDefaultDecisionThreshold,
                                 std::vector<std::string>* warnings = nullptr);

struct GapReport {
  double recall_gap = 0.0;         // acc(Both) - acc(JustMain)
  double hallucination_gap = 0.0;  // acc(Neither) - acc(JustSpurious)
  double threshold = kDefaultDecisionThreshold;
};

GapReport ComputeGaps(const SplitAccuracies& acc);

// Sum over splits of weight * accuracy.
double ReweightedAccuracy(const SplitAccuracies& acc, const BalancedWeights& weights);

double BalancedAccuracy(std::span<const PredictionRecord> preds,
                        const BalancedWeights& weights,
                        double threshold = kDefaultDecisionThreshold);

// One row of the threshold sweep. An example is predicted positive when
// score >= threshold. Accuracies of splits with no natural examples are NaN.
struct SweepRow {
  double threshold = 0.0;
  std::array<double, 4> accuracy{};
  double recall = 0.0;  // recall on the weighted distribution
  std::optional<double> precision;  // undefined with no predicted positives
  double recall_gap = 0.0;
  double hallucination_gap = 0.0;
};

// Thresholds are the distinct scores plus {0, 1}, visited in decreasing
// order (so recall is non-decreasing). Each natural example in split s
// carries weight weights[s] / count(s). Throws DegenerateLabels unless both
// a positive and a negative natural example are present.
std::vector<SweepRow> ThresholdSweep(std::span<const PredictionRecord> preds,
                                     const BalancedWeights& weights);

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  double threshold = 0.0;
};

struct Curve {
  std::vector<CurvePoint> points;  // x non-decreasing
  double auc = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;
};

// Precision vs. weighted recall. `auc` is the step-interpolated average
// precision: sum over thresholds of (R_k - R_{k-1}) * P_k with R_0 = 0.
Curve PrecisionRecallCurve(std::span<const PredictionRecord> preds,
                           const BalancedWeights& weights);

double AveragePrecision(std::span<const PredictionRecord> preds,
                        const BalancedWeights& weights);

// |recall gap| (resp. |hallucination gap|) vs. weighted recall across the
// sweep. Points sharing an x keep the largest y; `auc` is the trapezoidal
// area over [x_min, x_max]. Throws EmptySplit if a split has no natural
// examples.
Curve AverageRecallGap(std::span<const PredictionRecord> preds,
                       const BalancedWeights& weights);
Curve AverageHallucinationGap(std::span<const PredictionRecord> preds,
                              const BalancedWeights& weights);

// Trapezoidal area under a polyline already sorted by x, after collapsing
// equal x to their maximum y.
Curve MakeTrapezoidCurve(std::vector<CurvePoint> points);

struct CounterfactualCell {
  Split source = Split::kBoth;
  Transform transform = Transform::kRemoveSpurious;
  Split target = Split::kJustMain;
  std::size_t n = 0;
  double flip_probability = 0.0;
};

// The eight (source split, transform) moves between splits that differ by
// one object, in split-then-transform order.
std::vector<CounterfactualCell> CounterfactualCells();

// Flip probability per (source, transform) present in `pairs`, in
// CounterfactualCells() order. Throws InvalidTransform for a pair whose
// transform does not apply to its source split.
std::vector<CounterfactualCell> CounterfactualMatrix(std::span<const FlipPair> pairs);

struct RelativeChange {
  double value = 0.0;
  // Set when the baseline is zero; `value` is then the absolute change
  // |mitigated| - |baseline| rather than a percentage.
  bool absolute = false;
};

// (|mitigated| - |baseline|) / |baseline| * 100.
RelativeChange RelativeGapChange(double baseline, double mitigated);

}  // namespace spirekit

#endif  // SPIREKIT_METRICS_H_
