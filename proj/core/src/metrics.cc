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

#include "spirekit/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "spirekit/error.h"

namespace spirekit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void RequireAllSplits(const std::array<std::size_t, 4>& n) {
  std::string missing;
  for (Split s : kAllSplits) {
    if (n[Index(s)] == 0) {
      if (!missing.empty()) missing += ", ";
      missing += SplitName(s);
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kEmptySplit, "no natural predictions in " + missing);
  }
}

double Accuracy(Split s, std::size_t predicted_positive, std::size_t n) {
  if (n == 0) return kNaN;
  const double pos = static_cast<double>(predicted_positive) / static_cast<double>(n);
  return HasMain(s) ? pos : 1.0 - pos;
}

}  // namespace

void ValidatePrediction(const PredictionRecord& p) {
  if (p.label != HasMain(p.split)) {
    throw Error(ErrorCode::kInvalidArgument,
                "prediction '" + p.id + "': label " + std::to_string(p.label) +
                    " inconsistent with split " + std::string(SplitName(p.split)));
  }
  if (!(p.score >= 0.0 && p.score <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "prediction '" + p.id + "': score outside [0, 1]");
  }
}

SplitAccuracies PerSplitAccuracy(std::span<const PredictionRecord> preds,
                                 double threshold,
                                 std::vector<std::string>* warnings) {
  SplitAccuracies acc;
  acc.threshold = threshold;
  std::array<std::size_t, 4> correct{};
  for (const PredictionRecord& p : preds) {
    if (!p.natural) continue;
    ++acc.n[Index(p.split)];
    if (Binarize(p.score, threshold) == p.label) ++correct[Index(p.split)];
  }
  RequireAllSplits(acc.n);
  for (Split s : kAllSplits) {
    const std::size_t i = Index(s);
    acc.accuracy[i] = static_cast<double>(correct[i]) / static_cast<double>(acc.n[i]);
    if (warnings && acc.n[i] < kMinReliableSplitSize) {
      warnings->push_back("split " + std::string(SplitName(s)) + " has only " +
                          std::to_string(acc.n[i]) + " natural examples (< " +
                          std::to_string(kMinReliableSplitSize) + ")");
    }
  }
  return acc;
}

GapReport ComputeGaps(const SplitAccuracies& acc) {
  return {acc[Split::kBoth] - acc[Split::kJustMain],
          acc[Split::kNeither] - acc[Split::kJustSpurious], acc.threshold};
}

double ReweightedAccuracy(const SplitAccuracies& acc,
                          const BalancedWeights& weights) {
  double total = 0.0;
  for (Split s : kAllSplits) total += weights[s] * acc[s];
  return total;
}

double BalancedAccuracy(std::span<const PredictionRecord> preds,
                        const BalancedWeights& weights, double threshold) {
  return ReweightedAccuracy(PerSplitAccuracy(preds, threshold), weights);
}

std::vector<SweepRow> ThresholdSweep(std::span<const PredictionRecord> preds,
                                     const BalancedWeights& weights) {
  std::vector<const PredictionRecord*> natural;
  std::array<std::size_t, 4> n{};
  for (const PredictionRecord& p : preds) {
    if (!p.natural) continue;
    natural.push_back(&p);
    ++n[Index(p.split)];
  }
  const std::size_t positives = n[Index(Split::kBoth)] + n[Index(Split::kJustMain)];
  if (positives == 0 || positives == natural.size()) {
    throw Error(ErrorCode::kDegenerateLabels,
                "need at least one positive and one negative natural prediction");
  }
  std::sort(natural.begin(), natural.end(),
            [](const PredictionRecord* a, const PredictionRecord* b) {
              return a->score > b->score;
            });

  std::vector<double> thresholds;
  thresholds.reserve(natural.size() + 2);
  thresholds.push_back(1.0);
  for (const PredictionRecord* p : natural) thresholds.push_back(p->score);
  thresholds.push_back(0.0);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  // Per-example weight of each split; zero for splits that are absent.
  std::array<double, 4> unit{};
  for (Split s : kAllSplits) {
    const std::size_t i = Index(s);
    unit[i] = n[i] > 0 ? weights[s] / static_cast<double>(n[i]) : 0.0;
  }
  double positive_mass = 0.0;
  for (Split s : {Split::kBoth, Split::kJustMain}) {
    if (n[Index(s)] > 0) positive_mass += weights[s];
  }

  std::vector<SweepRow> rows;
  rows.reserve(thresholds.size());
  std::array<std::size_t, 4> predicted{};
  std::size_t cursor = 0;
  for (double t : thresholds) {
    while (cursor < natural.size() && natural[cursor]->score >= t) {
      ++predicted[Index(natural[cursor]->split)];
      ++cursor;
    }
    SweepRow row;
    row.threshold = t;
    double tp_mass = 0.0;
    double pp_mass = 0.0;
    for (Split s : kAllSplits) {
      const std::size_t i = Index(s);
      row.accuracy[i] = Accuracy(s, predicted[i], n[i]);
      const double mass = unit[i] * static_cast<double>(predicted[i]);
      pp_mass += mass;
      if (HasMain(s)) tp_mass += mass;
    }
    row.recall = tp_mass / positive_mass;
    if (pp_mass > 0.0) row.precision = tp_mass / pp_mass;
    row.recall_gap = row.accuracy[Index(Split::kBoth)] - row.accuracy[Index(Split::kJustMain)];
    row.hallucination_gap =
        row.accuracy[Index(Split::kNeither)] - row.accuracy[Index(Split::kJustSpurious)];
    rows.push_back(row);
  }
  return rows;
}

Curve PrecisionRecallCurve(std::span<const PredictionRecord> preds,
                           const BalancedWeights& weights) {
  const std::vector<SweepRow> rows = ThresholdSweep(preds, weights);
  Curve curve;
  double previous_recall = 0.0;
  for (const SweepRow& row : rows) {
    if (!row.precision) continue;
    curve.auc += (row.recall - previous_recall) * *row.precision;
    previous_recall = row.recall;
    curve.points.push_back({row.recall, *row.precision, row.threshold});
  }
  if (!curve.points.empty()) {
    curve.x_min = curve.points.front().x;
    curve.x_max = curve.points.back().x;
  }
  return curve;
}

double AveragePrecision(std::span<const PredictionRecord> preds,
                        const BalancedWeights& weights) {
  return PrecisionRecallCurve(preds, weights).auc;
}

Curve MakeTrapezoidCurve(std::vector<CurvePoint> points) {
  Curve curve;
  for (const CurvePoint& p : points) {
    if (!curve.points.empty() && curve.points.back().x == p.x) {
      if (p.y > curve.points.back().y) curve.points.back() = p;
      continue;
    }
    curve.points.push_back(p);
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const CurvePoint& a = curve.points[i - 1];
    const CurvePoint& b = curve.points[i];
    curve.auc += 0.5 * (b.x - a.x) * (a.y + b.y);
  }
  if (!curve.points.empty()) {
    curve.x_min = curve.points.front().x;
    curve.x_max = curve.points.back().x;
  }
  return curve;
}

namespace {

template <typename GapFn>
Curve GapCurve(std::span<const PredictionRecord> preds,
               const BalancedWeights& weights, GapFn gap) {
  std::array<std::size_t, 4> n{};
  for (const PredictionRecord& p : preds) {
    if (p.natural) ++n[Index(p.split)];
  }
  RequireAllSplits(n);
  std::vector<CurvePoint> points;
  for (const SweepRow& row : ThresholdSweep(preds, weights)) {
    points.push_back({row.recall, std::fabs(gap(row)), row.threshold});
  }
  return MakeTrapezoidCurve(std::move(points));
}

}  // namespace

Curve AverageRecallGap(std::span<const PredictionRecord> preds,
                       const BalancedWeights& weights) {
  return GapCurve(preds, weights, [](const SweepRow& r) { return r.recall_gap; });
}

Curve AverageHallucinationGap(std::span<const PredictionRecord> preds,
                              const BalancedWeights& weights) {
  return GapCurve(preds, weights,
                  [](const SweepRow& r) { return r.hallucination_gap; });
}

std::vector<CounterfactualCell> CounterfactualCells() {
  std::vector<CounterfactualCell> cells;
  for (Split s : kAllSplits) {
    for (Transform t : {Transform::kRemoveSpurious, Transform::kRemoveMain,
                        Transform::kAddSpurious, Transform::kAddMain}) {
      if (const auto target = ApplyTransform(s, t)) {
        cells.push_back({s, t, *target, 0, 0.0});
      }
    }
  }
  return cells;
}

std::vector<CounterfactualCell> CounterfactualMatrix(std::span<const FlipPair> pairs) {
  std::vector<CounterfactualCell> cells = CounterfactualCells();
  std::vector<std::size_t> flips(cells.size(), 0);
  for (const FlipPair& p : pairs) {
    const auto it = std::find_if(cells.begin(), cells.end(), [&](const auto& c) {
      return c.source == p.source_split && c.transform == p.transform;
    });
    if (it == cells.end()) {
      throw Error(ErrorCode::kInvalidTransform,
                  "pair '" + p.example_id + "': " +
                      std::string(TransformName(p.transform)) + " does not apply to " +
                      std::string(SplitName(p.source_split)));
    }
    ++it->n;
    if (p.flipped()) ++flips[static_cast<std::size_t>(it - cells.begin())];
  }
  std::vector<CounterfactualCell> present;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].n == 0) continue;
    cells[i].flip_probability =
        static_cast<double>(flips[i]) / static_cast<double>(cells[i].n);
    present.push_back(cells[i]);
  }
  return present;
}

RelativeChange RelativeGapChange(double baseline, double mitigated) {
  const double b = std::fabs(baseline);
  const double m = std::fabs(mitigated);
  if (b == 0.0) return {m - b, true};
  return {(m - b) / b * 100.0, false};
}

}  // namespace spirekit
