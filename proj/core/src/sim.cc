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

#include "spirekit/sim.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "spirekit/error.h"
#include "spirekit/project.h"

namespace spirekit::sim {

namespace {

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                      std::uint64_t c) {
  return SplitMix(SplitMix(SplitMix(SplitMix(seed) ^ a) ^ b) ^ c);
}

std::size_t Channel(int c) { return static_cast<std::size_t>(c); }

}  // namespace

void SyntheticConfig::Validate() const {
  if (d <= 0) throw Error(ErrorCode::kInvalidArgument, "d must be positive");
  const std::array<int, 4> channels = {main_channel, spurious_channel,
                                       grey_box_channel, paste_channel};
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i] < 0 || channels[i] >= d) {
      throw Error(ErrorCode::kInvalidArgument, "channel index out of range");
    }
    for (std::size_t j = i + 1; j < channels.size(); ++j) {
      if (channels[i] == channels[j]) {
        throw Error(ErrorCode::kInvalidArgument, "channels must be distinct");
      }
    }
  }
  if (n <= 0) throw Error(ErrorCode::kInvalidArgument, "n must be positive");
  if (!(noise_sigma >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise_sigma must be non-negative");
  }
  if (!(p_main > 0.0 && p_main < 1.0 && p_spurious > 0.0 && p_spurious < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "marginals must lie in (0, 1)");
  }
}

std::array<double, 4> JointProbabilities(double p, double p_main, double p_spurious) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::kInfeasibleJoint, "p must lie in (0, 1)");
  }
  const double both = p * p_spurious;
  const double just_spurious = (1.0 - p) * p_spurious;
  const double just_main = p_main - both;
  const double neither = 1.0 - p_main - p_spurious + both;
  constexpr double kTol = 1e-12;
  if (just_main < -kTol || neither < -kTol) {
    throw Error(ErrorCode::kInfeasibleJoint,
                "P(Main|Spurious) = " + std::to_string(p) +
                    " is incompatible with P(Main) = " + std::to_string(p_main) +
                    " and P(Spurious) = " + std::to_string(p_spurious));
  }
  return {both, std::max(0.0, just_main), just_spurious, std::max(0.0, neither)};
}

std::vector<ExampleRecord> Generate(double p, const SyntheticConfig& config) {
  config.Validate();
  const std::array<double, 4> joint =
      JointProbabilities(p, config.p_main, config.p_spurious);
  std::mt19937_64 rng(config.seed);
  const auto n = static_cast<std::size_t>(config.n);

  std::vector<Split> splits;
  splits.reserve(n);
  if (config.stratified) {
    std::array<std::size_t, 4> sizes{};
    if (config.p_main == 0.5 && config.p_spurious == 0.5 && n % 2 == 0) {
      const auto both = static_cast<std::size_t>(std::llround(joint[0] * static_cast<double>(n)));
      sizes = {both, n / 2 - both, n / 2 - both, both};
    } else {
      std::size_t assigned = 0;
      std::array<double, 4> remainder{};
      for (std::size_t i = 0; i < 4; ++i) {
        const double mass = joint[i] * static_cast<double>(n);
        sizes[i] = static_cast<std::size_t>(std::floor(mass));
        remainder[i] = mass - std::floor(mass);
        assigned += sizes[i];
      }
      std::array<std::size_t, 4> order = {0, 1, 2, 3};
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
      for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % 4]];
    }
    for (Split s : kAllSplits) splits.insert(splits.end(), sizes[Index(s)], s);
    std::shuffle(splits.begin(), splits.end(), rng);
  } else {
    const double s_given_m = joint[0] / config.p_main;
    const double s_given_not_m = joint[2] / (1.0 - config.p_main);
    std::bernoulli_distribution main_dist(config.p_main);
    std::bernoulli_distribution s_m(s_given_m);
    std::bernoulli_distribution s_not_m(s_given_not_m);
    for (std::size_t i = 0; i < n; ++i) {
      const bool main = main_dist(rng);
      const bool spurious = main ? s_m(rng) : s_not_m(rng);
      splits.push_back(AssignSplit(main, spurious));
    }
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<ExampleRecord> records;
  records.reserve(n);
  char id[32];
  for (std::size_t i = 0; i < n; ++i) {
    ExampleRecord r;
    std::snprintf(id, sizeof(id), "x%06zu", i);
    r.id = id;
    r.main = HasMain(splits[i]);
    r.spurious = HasSpurious(splits[i]);
    r.payload.assign(static_cast<std::size_t>(config.d), 0.0);
    for (int c = 0; c < config.d; ++c) {
      if (c == config.grey_box_channel || c == config.paste_channel) continue;
      r.payload[Channel(c)] = config.noise_sigma * noise(rng);
    }
    if (r.main) r.payload[Channel(config.main_channel)] += config.signal_main;
    if (r.spurious) r.payload[Channel(config.spurious_channel)] += config.signal_spurious;
    records.push_back(std::move(r));
  }
  return records;
}

ExampleRecord Counterfact(const ExampleRecord& record, Transform t,
                          const SyntheticConfig& config) {
  ExampleRecord cf = MakeCounterfactual(record, t, ArtifactKind::kGreyBoxRemoval);
  if (cf.payload.size() != static_cast<std::size_t>(config.d)) {
    throw Error(ErrorCode::kInvalidArgument,
                "record '" + record.id + "' payload does not match config.d");
  }
  // The object's signal is toggled; the channel's noise is the untouched
  // background of the edit.
  auto& x = cf.payload;
  switch (t) {
    case Transform::kRemoveSpurious:
      x[Channel(config.spurious_channel)] -= config.signal_spurious;
      x[Channel(config.grey_box_channel)] = 1.0;
      break;
    case Transform::kRemoveMain:
      x[Channel(config.main_channel)] -= config.signal_main;
      x[Channel(config.grey_box_channel)] = 1.0;
      break;
    case Transform::kAddSpurious:
      x[Channel(config.spurious_channel)] += config.signal_spurious;
      x[Channel(config.paste_channel)] = 1.0;
      break;
    case Transform::kAddMain:
      x[Channel(config.main_channel)] += config.signal_main;
      x[Channel(config.paste_channel)] = 1.0;
      break;
  }
  return cf;
}

CounterfactFn MakeCounterfactFn(const SyntheticConfig& config) {
  return [config](const ExampleRecord& r, Transform t) {
    return Counterfact(r, t, config);
  };
}

double TrainedModel::Logit(std::span<const double> x) const {
  double z = b;
  for (std::size_t i = 0; i < w.size(); ++i) z += w[i] * x[i];
  return z;
}

double TrainedModel::Score(std::span<const double> x) const {
  return Sigmoid(Logit(x));
}

namespace {

double MeanLoss(const TrainedModel& m, std::span<const ExampleRecord> data) {
  double loss = 0.0;
  for (const ExampleRecord& r : data) {
    const double z = m.Logit(r.payload);
    // log(1 + e^{-z}) for positives, log(1 + e^{z}) for negatives.
    const double signed_z = r.main ? -z : z;
    loss += signed_z > 0 ? signed_z + std::log1p(std::exp(-signed_z))
                         : std::log1p(std::exp(signed_z));
  }
  return loss / static_cast<double>(data.size());
}

}  // namespace

TrainedModel Train(std::span<const ExampleRecord> dataset, const TrainOptions& options) {
  if (dataset.empty()) throw Error(ErrorCode::kEmptyDataset, "empty training set");
  const std::size_t d = dataset.front().payload.size();
  std::size_t positives = 0;
  for (const ExampleRecord& r : dataset) {
    if (r.payload.size() != d) {
      throw Error(ErrorCode::kInvalidArgument, "inconsistent payload dimension");
    }
    if (r.main) ++positives;
  }
  if (positives == 0 || positives == dataset.size()) {
    throw Error(ErrorCode::kDegenerateLabels, "training needs both classes");
  }

  TrainedModel model;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> init(0.0, 0.01);
  model.w.resize(d);
  for (double& wi : model.w) wi = init(rng);
  model.b = 0.0;

  const double inv_n = 1.0 / static_cast<double>(dataset.size());
  std::vector<double> grad(d);
  model.loss_log.reserve(static_cast<std::size_t>(options.epochs) + 1);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    double loss = 0.0;
    for (const ExampleRecord& r : dataset) {
      const double z = model.Logit(r.payload);
      const double signed_z = r.main ? -z : z;
      loss += signed_z > 0 ? signed_z + std::log1p(std::exp(-signed_z))
                           : std::log1p(std::exp(signed_z));
      const double err = Sigmoid(z) - (r.main ? 1.0 : 0.0);
      for (std::size_t i = 0; i < d; ++i) grad[i] += err * r.payload[i];
      grad_b += err;
    }
    loss *= inv_n;
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::kDivergence,
                  "training loss became non-finite at epoch " + std::to_string(epoch) +
                      " with learning rate " + std::to_string(options.learning_rate));
    }
    model.loss_log.push_back(loss);
    for (std::size_t i = 0; i < d; ++i) {
      model.w[i] -= options.learning_rate * grad[i] * inv_n;
    }
    model.b -= options.learning_rate * grad_b * inv_n;
    if (!std::isfinite(model.b) ||
        !std::all_of(model.w.begin(), model.w.end(), [](double v) { return std::isfinite(v); })) {
      throw Error(ErrorCode::kDivergence,
                  "weights became non-finite at epoch " + std::to_string(epoch) +
                      " with learning rate " + std::to_string(options.learning_rate));
    }
  }
  const double final_loss = MeanLoss(model, dataset);
  if (!std::isfinite(final_loss)) {
    throw Error(ErrorCode::kDivergence,
                "training diverged with learning rate " +
                    std::to_string(options.learning_rate));
  }
  model.loss_log.push_back(final_loss);
  return model;
}

std::vector<PredictionRecord> Predict(const TrainedModel& model,
                                      std::span<const ExampleRecord> records) {
  std::vector<PredictionRecord> preds;
  preds.reserve(records.size());
  for (const ExampleRecord& r : records) {
    preds.push_back({r.id, r.split(), r.main, model.Score(r.payload), r.natural()});
  }
  return preds;
}

std::vector<FlipPair> CounterfactualFlips(const TrainedModel& model,
                                          std::span<const ExampleRecord> records,
                                          const SyntheticConfig& config) {
  std::vector<FlipPair> pairs;
  for (const ExampleRecord& r : records) {
    if (!r.natural()) continue;
    const bool original = Binarize(model.Score(r.payload));
    for (Transform t : kAllTransforms) {
      if (!ApplyTransform(r.split(), t)) continue;
      const ExampleRecord cf = Counterfact(r, t, config);
      pairs.push_back({r.id, original, Binarize(model.Score(cf.payload)), t, r.split()});
    }
  }
  return pairs;
}

std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kNone: return "none";
    case Strategy::kSpire: return "spire";
    case Strategy::kQcec: return "qcec";
  }
  return "?";
}

std::optional<Strategy> ParseStrategy(std::string_view name) {
  for (Strategy s : {Strategy::kNone, Strategy::kSpire, Strategy::kQcec}) {
    if (StrategyName(s) == name) return s;
  }
  return std::nullopt;
}

Summary Summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

const CellResult& SweepResult::Cell(double p, int trial, Strategy strategy) const {
  for (const CellResult& c : cells) {
    if (c.p == p && c.trial == trial && c.strategy == strategy) return c;
  }
  throw Error(ErrorCode::kIncompleteSweep,
              "no cell for p=" + std::to_string(p) + " trial=" + std::to_string(trial) +
                  " strategy=" + std::string(StrategyName(strategy)));
}

std::vector<AggregateRow> SweepResult::Aggregate(const SyntheticConfig& config) const {
  std::vector<AggregateRow> rows;
  for (double p : grid) {
    for (Strategy strategy : strategies) {
      std::vector<double> ba, rg, hg, arg, ahg, ba_d, arg_d, ahg_d, grey, paste, spur, flip;
      for (int t = 0; t < trials; ++t) {
        const CellResult& c = Cell(p, t, strategy);
        const CellResult& base = Cell(p, t, Strategy::kNone);
        ba.push_back(c.balanced_accuracy);
        rg.push_back(c.gaps.recall_gap);
        hg.push_back(c.gaps.hallucination_gap);
        arg.push_back(std::fabs(c.gaps.recall_gap));
        ahg.push_back(std::fabs(c.gaps.hallucination_gap));
        ba_d.push_back(c.balanced_accuracy - base.balanced_accuracy);
        arg_d.push_back(std::fabs(c.gaps.recall_gap) - std::fabs(base.gaps.recall_gap));
        ahg_d.push_back(std::fabs(c.gaps.hallucination_gap) -
                        std::fabs(base.gaps.hallucination_gap));
        grey.push_back(c.weights[Channel(config.grey_box_channel)]);
        paste.push_back(c.weights[Channel(config.paste_channel)]);
        spur.push_back(c.weights[Channel(config.spurious_channel)]);
        for (const CounterfactualCell& cell : c.counterfactual_matrix) {
          if (cell.source == Split::kBoth && cell.transform == Transform::kRemoveSpurious) {
            flip.push_back(cell.flip_probability);
          }
        }
      }
      AggregateRow row;
      row.p = p;
      row.strategy = strategy;
      row.balanced_accuracy = Summarize(ba);
      row.recall_gap = Summarize(rg);
      row.hallucination_gap = Summarize(hg);
      row.abs_recall_gap = Summarize(arg);
      row.abs_hallucination_gap = Summarize(ahg);
      row.balanced_accuracy_diff = Summarize(ba_d);
      row.abs_recall_gap_diff = Summarize(arg_d);
      row.abs_hallucination_gap_diff = Summarize(ahg_d);
      row.grey_box_weight = Summarize(grey);
      row.paste_weight = Summarize(paste);
      row.spurious_weight = Summarize(spur);
      row.flip_remove_spurious = Summarize(flip);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<double> DefaultGrid() {
  return {0.025, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.975};
}

SweepResult RunControlled(std::span<const double> grid, int trials,
                          const SyntheticConfig& config,
                          std::span<const Strategy> strategies,
                          const ControlledOptions& options) {
  config.Validate();
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty p grid");
  if (trials <= 0) throw Error(ErrorCode::kInvalidArgument, "trials must be positive");
  for (double p : grid) {
    if (!(p > 0.0 && p < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "grid values must lie in (0, 1)");
    }
  }

  SweepResult result;
  result.grid.assign(grid.begin(), grid.end());
  std::sort(result.grid.begin(), result.grid.end());
  result.grid.erase(std::unique(result.grid.begin(), result.grid.end()), result.grid.end());
  result.trials = trials;
  result.strategies.push_back(Strategy::kNone);
  for (Strategy s : strategies) {
    if (std::find(result.strategies.begin(), result.strategies.end(), s) ==
        result.strategies.end()) {
      result.strategies.push_back(s);
    }
  }

  const CounterfactFn counterfact = MakeCounterfactFn(config);
  for (std::size_t pi = 0; pi < result.grid.size(); ++pi) {
    const double p = result.grid[pi];
    for (int trial = 0; trial < trials; ++trial) {
      const auto t = static_cast<std::uint64_t>(trial);
      SyntheticConfig train_cfg = config;
      train_cfg.stratified = true;
      train_cfg.seed = MixSeed(config.seed, t, pi, 1);
      const std::vector<ExampleRecord> train = Generate(p, train_cfg);

      SyntheticConfig test_cfg = config;
      test_cfg.stratified = true;
      test_cfg.p_main = 0.5;
      test_cfg.p_spurious = 0.5;
      test_cfg.n = options.n_test;
      test_cfg.seed = MixSeed(config.seed, t, 0, 2);
      const std::vector<ExampleRecord> test = Generate(0.5, test_cfg);

      const SplitCounts counts = CountSplits(train, false);
      const BalancedWeights weights = BalancedWeights::FromStats(ComputeStats(counts));

      for (Strategy strategy : result.strategies) {
        std::vector<ExampleRecord> augmented;
        if (strategy == Strategy::kNone) {
          augmented = train;
        } else {
          AugmentationPlan plan =
              strategy == Strategy::kSpire ? PlanSetting1(counts) : PlanQcec(counts);
          plan.mode = options.plan_mode;
          augmented = ApplyPlan(plan, train, counterfact, MixSeed(config.seed, t, pi, 4));
        }
        TrainOptions train_opts = options.train;
        train_opts.seed = MixSeed(config.seed, t, pi, 3);
        const TrainedModel model = Train(augmented, train_opts);

        const std::vector<PredictionRecord> preds = Predict(model, test);
        CellResult cell;
        cell.p = p;
        cell.trial = trial;
        cell.strategy = strategy;
        cell.train_size = augmented.size();
        cell.accuracies = PerSplitAccuracy(preds);
        cell.balanced_accuracy = ReweightedAccuracy(cell.accuracies, weights);
        cell.gaps = ComputeGaps(cell.accuracies);
        cell.counterfactual_matrix =
            CounterfactualMatrix(CounterfactualFlips(model, test, config));
        cell.weights = model.w;
        cell.offset = model.b;
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

AcceptDecision BenchmarkAccept(const SweepResult& sweep, double margin) {
  std::map<double, std::vector<double>> ba;
  for (const CellResult& c : sweep.cells) {
    if (c.strategy == Strategy::kNone) ba[c.p].push_back(c.balanced_accuracy);
  }
  if (!ba.contains(0.5) || ba.begin()->first >= 0.5 || ba.rbegin()->first <= 0.5) {
    throw Error(ErrorCode::kIncompleteSweep,
                "acceptance needs baseline cells at p = 0.5 and on both sides of it");
  }
  const double mid = Summarize(ba.at(0.5)).mean;
  AcceptDecision d;
  d.drop_low = mid - Summarize(ba.begin()->second).mean;
  d.drop_high = mid - Summarize(ba.rbegin()->second).mean;
  d.accepted = d.drop_low > margin && d.drop_high > margin;
  return d;
}

}  // namespace spirekit::sim
