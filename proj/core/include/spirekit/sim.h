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

#ifndef SPIREKIT_SIM_H_
#define SPIREKIT_SIM_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spirekit/balance.h"
#include "spirekit/dataset.h"
#include "spirekit/metrics.h"

namespace spirekit::sim {

// Synthetic stand-in for an image dataset. Each example is a feature vector:
//   payload[main_channel]     = main * signal_main + noise
//   payload[spurious_channel] = spurious * signal_spurious + noise
//   payload[grey_box_channel] = 1 on counterfactuals that removed an object
//   payload[paste_channel]    = 1 on counterfactuals that added an object
// and every other channel is pure noise. Artifact channels are zero on
// natural examples.
struct SyntheticConfig {
  int d = 8;
  int main_channel = 0;
  int spurious_channel = 1;
  int grey_box_channel = 2;
  int paste_channel = 3;
  double signal_main = 1.0;
  double signal_spurious = 2.0;
  double noise_sigma = 0.6;
  int n = 2000;
  std::uint64_t seed = 0;
  double p_main = 0.5;
  double p_spurious = 0.5;
  // Stratified generation fixes split sizes at their expected values
  // (rounded, with |Both| = |Neither| and |JM| = |JS| when the marginals
  // are 0.5) instead of drawing labels independently.
  bool stratified = false;

  void Validate() const;
};

// Joint split probabilities {Both, JM, JS, Neither} with P(Main|Spurious) =
// p and the configured marginals. Throws InfeasibleJoint if any is
// negative or p is outside (0, 1).
std::array<double, 4> JointProbabilities(double p, double p_main, double p_spurious);

// n natural records with payloads, deterministic given config.seed.
std::vector<ExampleRecord> Generate(double p, const SyntheticConfig& config);

// Edits the payload: a removal subtracts the object's signal from its
// channel and sets the grey-box channel; an addition adds the signal and
// sets the paste channel. The channel's noise is kept, so an edited example
// looks like a natural member of its target split apart from the artifact.
// All other entries are copied bit for bit. Throws InvalidTransform when `t`
// does not apply.
ExampleRecord Counterfact(const ExampleRecord& record, Transform t,
                          const SyntheticConfig& config);

CounterfactFn MakeCounterfactFn(const SyntheticConfig& config);

struct TrainOptions {
  int epochs = 1500;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
};

struct TrainedModel {
  std::vector<double> w;
  double b = 0.0;
  std::vector<double> loss_log;  // mean BCE before each epoch, then final

  double Logit(std::span<const double> x) const;
  double Score(std::span<const double> x) const;
};

// Logistic regression on payload -> main by deterministic full-batch
// gradient descent from a small seeded initialization. Throws
// DegenerateLabels with one class, Divergence if the loss becomes NaN.
TrainedModel Train(std::span<const ExampleRecord> dataset, const TrainOptions& options);

std::vector<PredictionRecord> Predict(const TrainedModel& model,
                                      std::span<const ExampleRecord> records);

// Prediction flips of `model` on every applicable (split, transform) move of
// `records` (natural only).
std::vector<FlipPair> CounterfactualFlips(const TrainedModel& model,
                                          std::span<const ExampleRecord> records,
                                          const SyntheticConfig& config);

enum class Strategy { kNone, kSpire, kQcec };

std::string_view StrategyName(Strategy s);
std::optional<Strategy> ParseStrategy(std::string_view name);

struct ControlledOptions {
  TrainOptions train;
  int n_test = 2000;
  PlanMode plan_mode = PlanMode::kSampled;
};

struct CellResult {
  double p = 0.0;
  int trial = 0;
  Strategy strategy = Strategy::kNone;
  std::size_t train_size = 0;
  SplitAccuracies accuracies;
  double balanced_accuracy = 0.0;
  GapReport gaps;
  std::vector<CounterfactualCell> counterfactual_matrix;
  std::vector<double> weights;
  double offset = 0.0;
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single value
};

Summary Summarize(std::span<const double> values);

// Mean over trials of one (p, strategy) cell, plus the mean and standard
// deviation of its paired difference from the baseline.
struct AggregateRow {
  double p = 0.0;
  Strategy strategy = Strategy::kNone;
  Summary balanced_accuracy;
  Summary recall_gap;
  Summary hallucination_gap;
  Summary abs_recall_gap;
  Summary abs_hallucination_gap;
  Summary balanced_accuracy_diff;
  Summary abs_recall_gap_diff;
  Summary abs_hallucination_gap_diff;
  Summary grey_box_weight;
  Summary paste_weight;
  Summary spurious_weight;
  Summary flip_remove_spurious;
};

struct SweepResult {
  std::vector<double> grid;
  int trials = 0;
  std::vector<Strategy> strategies;
  std::vector<CellResult> cells;  // ordered by (p, trial, strategy)

  const CellResult& Cell(double p, int trial, Strategy strategy) const;
  std::vector<AggregateRow> Aggregate(const SyntheticConfig& config) const;
};

// The controlled-benchmark grid: 0.025 ... 0.975.
std::vector<double> DefaultGrid();

// For every p and trial: generate a stratified training set, augment it per
// strategy, train, and evaluate on a balanced natural test set. The
// baseline (none) always runs so differences are defined. Deterministic
// given config.seed.
SweepResult RunControlled(std::span<const double> grid, int trials,
                          const SyntheticConfig& config,
                          std::span<const Strategy> strategies,
                          const ControlledOptions& options = {});

struct AcceptDecision {
  bool accepted = false;
  double drop_low = 0.0;   // BA(0.5) - BA(min p)
  double drop_high = 0.0;  // BA(0.5) - BA(max p)
};

// Keeps a pair-config for the benchmark when the baseline's mean balanced
// accuracy falls by more than `margin` at both ends of the grid relative to
// p = 0.5. Throws IncompleteSweep without baseline cells at p = 0.5 and on
// both sides of it.
AcceptDecision BenchmarkAccept(const SweepResult& sweep, double margin = 0.05);

}  // namespace spirekit::sim

#endif  // SPIREKIT_SIM_H_
