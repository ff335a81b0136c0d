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

#include <gtest/gtest.h>

#include <random>

#include "spirekit/error.h"
#include "spirekit/sim.h"
#include "test_support.h"

namespace spirekit {
namespace {

using testing::PredictionsWithAccuracies;

template <typename F>
ErrorCode CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a spirekit::Error";
  return ErrorCode::kInvalidArgument;
}

// Step-interpolated AP computed from scratch: for each distinct threshold,
// rescan every prediction to get weighted TP and predicted-positive mass.
double BruteForceAp(const std::vector<PredictionRecord>& preds, const BalancedWeights& w) {
  std::array<double, 4> n{};
  for (const auto& p : preds) n[Index(p.split)] += 1.0;
  std::vector<double> thresholds;
  for (const auto& p : preds) thresholds.push_back(p.score);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double pos_mass = 0.0;
  for (Split s : {Split::kBoth, Split::kJustMain}) if (n[Index(s)] > 0) pos_mass += w[s];
  double ap = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    double tp = 0.0, pp = 0.0;
    for (const auto& p : preds) {
      if (p.score < t) continue;
      const double m = w[p.split] / n[Index(p.split)];
      pp += m;
      if (p.label) tp += m;
    }
    const double recall = tp / pos_mass;
    ap += (recall - prev_recall) * (tp / pp);
    prev_recall = recall;
  }
  return ap;
}

std::vector<PredictionRecord> RandomPreds(std::size_t per_split, std::uint64_t seed,
                                          double separation) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<PredictionRecord> out;
  for (Split s : kAllSplits) {
    for (std::size_t i = 0; i < per_split; ++i) {
      PredictionRecord p;
      p.id = std::string(SplitName(s)) + std::to_string(i);
      p.split = s;
      p.label = HasMain(s);
      const double logit = (p.label ? separation : -separation) + noise(rng);
      p.score = 1.0 / (1.0 + std::exp(-logit));
      out.push_back(p);
    }
  }
  return out;
}

TEST(PerSplitAccuracy, PerfectScores) {
  const auto preds = PredictionsWithAccuracies({40, 40, 40, 40}, {40, 40, 40, 40});
  const SplitAccuracies acc = PerSplitAccuracy(preds);
  for (Split s : kAllSplits) EXPECT_DOUBLE_EQ(acc[s], 1.0);
}

TEST(PerSplitAccuracy, TennisFixtureGaps) {
  const auto preds = testing::TennisFixture();
  const SplitAccuracies acc = PerSplitAccuracy(preds);
  EXPECT_DOUBLE_EQ(acc[Split::kBoth], 0.866);
  EXPECT_DOUBLE_EQ(acc[Split::kJustMain], 0.412);
  const GapReport gaps = ComputeGaps(acc);
  EXPECT_NEAR(gaps.recall_gap, 0.454, 1e-12);
  EXPECT_NEAR(gaps.hallucination_gap, 0.005, 1e-12);
}

TEST(PerSplitAccuracy, CounterfactualsIgnoredAndSmallSplitsWarned) {
  auto preds = PredictionsWithAccuracies({10, 40, 40, 40}, {10, 40, 40, 40});
  PredictionRecord cf = preds.front();
  cf.id = "cf";
  cf.natural = false;
  cf.score = 0.0;
  preds.push_back(cf);
  std::vector<std::string> warnings;
  const SplitAccuracies acc = PerSplitAccuracy(preds, 0.5, &warnings);
  EXPECT_DOUBLE_EQ(acc[Split::kBoth], 1.0);
  EXPECT_EQ(acc.n[Index(Split::kBoth)], 10u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("Both"), std::string::npos);
}

TEST(PerSplitAccuracy, EmptySplitNamed) {
  const auto preds = PredictionsWithAccuracies({5, 0, 0, 5}, {5, 0, 0, 5});
  try {
    PerSplitAccuracy(preds);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySplit);
    EXPECT_NE(std::string(e.what()).find("JustMain"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("JustSpurious"), std::string::npos);
  }
}

TEST(ValidatePrediction, LabelAndScoreRange) {
  PredictionRecord p;
  p.id = "x";
  p.split = Split::kBoth;
  p.label = true;
  p.score = 0.5;
  EXPECT_NO_THROW(ValidatePrediction(p));
  p.label = false;
  EXPECT_THROW(ValidatePrediction(p), Error);
  p.label = true;
  p.score = 1.5;
  EXPECT_THROW(ValidatePrediction(p), Error);
}

TEST(BalancedAccuracy, UniformWeightsAverage) {
  const auto preds = PredictionsWithAccuracies({100, 100, 100, 100}, {90, 40, 70, 20});
  EXPECT_NEAR(BalancedAccuracy(preds, BalancedWeights::Uniform()), (0.9 + 0.4 + 0.7 + 0.2) / 4,
              1e-12);
  const auto perfect = PredictionsWithAccuracies({10, 20, 30, 40}, {10, 20, 30, 40});
  EXPECT_DOUBLE_EQ(BalancedAccuracy(perfect, BalancedWeights(0.2)), 1.0);
}

TEST(BalancedAccuracy, MatchesResamplingOracle) {
  const auto preds =
      PredictionsWithAccuracies({1000, 4000, 3000, 2000}, {910, 1500, 2400, 1960});
  for (double pm : {0.5, 0.3}) {
    const BalancedWeights w(pm);
    const double oracle = testing::ResampledBalancedAccuracy(preds, w, 4'000'000, 17);
    EXPECT_NEAR(BalancedAccuracy(preds, w), oracle, 1e-3) << pm;
  }
}

TEST(ThresholdSweep, PropertyRecallMonotoneAndAccuraciesBounded) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto preds = RandomPreds(60, seed, 1.0);
    const auto rows = ThresholdSweep(preds, BalancedWeights(0.4));
    ASSERT_GE(rows.size(), 2u);
    EXPECT_EQ(rows.front().threshold, 1.0);
    EXPECT_EQ(rows.back().threshold, 0.0);
    EXPECT_DOUBLE_EQ(rows.back().recall, 1.0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      EXPECT_GE(rows[i].recall, rows[i - 1].recall);
      EXPECT_LT(rows[i].threshold, rows[i - 1].threshold);
    }
    for (const auto& r : rows) {
      for (double a : r.accuracy) {
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, 1.0);
      }
    }
  }
}

TEST(ThresholdSweep, NeedsBothClasses) {
  const auto preds = PredictionsWithAccuracies({5, 5, 0, 0}, {5, 5, 0, 0});
  EXPECT_EQ(CodeOf([&] { ThresholdSweep(preds, BalancedWeights::Uniform()); }),
            ErrorCode::kDegenerateLabels);
}

TEST(AveragePrecision, PerfectClassifier) {
  const auto preds = PredictionsWithAccuracies({50, 50, 50, 50}, {50, 50, 50, 50});
  EXPECT_DOUBLE_EQ(AveragePrecision(preds, BalancedWeights::Uniform()), 1.0);
  EXPECT_DOUBLE_EQ(AveragePrecision(preds, BalancedWeights(0.05)), 1.0);
}

TEST(AveragePrecision, AgreesWithBruteForceOnRandomFixtures) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pm(0.05, 0.95);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto preds = RandomPreds(25 + seed, seed, 0.1 * static_cast<double>(seed % 7));
    const BalancedWeights w(pm(rng));
    EXPECT_NEAR(AveragePrecision(preds, w), BruteForceAp(preds, w), 1e-12) << seed;
  }
}

TEST(AveragePrecision, UninformativeScoresGivePositiveRate) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto preds = RandomPreds(2500, 1, 0.0);
  for (auto& p : preds) p.score = u(rng);
  for (double pm : {0.5, 0.2}) {
    EXPECT_NEAR(AveragePrecision(preds, BalancedWeights(pm)), pm, 0.02) << pm;
  }
}

TEST(AveragePrecision, ReversedPerfectClassifierIsTheMinimum) {
  auto preds = PredictionsWithAccuracies({20, 20, 20, 20}, {20, 20, 20, 20});
  for (auto& p : preds) p.score = 1.0 - p.score;
  const BalancedWeights w(0.3);
  const double reversed = AveragePrecision(preds, w);
  EXPECT_NEAR(reversed, BruteForceAp(preds, w), 1e-12);
  // Every other ranking of the same labels scores at least as high.
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto shuffled = preds;
    for (auto& p : shuffled) p.score = u(rng);
    EXPECT_GE(AveragePrecision(shuffled, w), reversed - 1e-12);
  }
}

TEST(GapCurves, IdenticalBothAndJustMainScoresGiveZero) {
  auto preds = RandomPreds(80, 12, 1.0);
  std::vector<double> both_scores;
  for (const auto& p : preds) {
    if (p.split == Split::kBoth) both_scores.push_back(p.score);
  }
  std::size_t k = 0;
  for (auto& p : preds) {
    if (p.split == Split::kJustMain) p.score = both_scores[k++];
  }
  const Curve c = AverageRecallGap(preds, BalancedWeights::Uniform());
  EXPECT_DOUBLE_EQ(c.auc, 0.0);
}

TEST(GapCurves, ConstantIntegrand) {
  std::vector<CurvePoint> pts;
  for (int i = 0; i <= 10; ++i) pts.push_back({i / 10.0, 0.4, 1.0 - i / 10.0});
  const Curve c = MakeTrapezoidCurve(pts);
  EXPECT_NEAR(c.auc, 0.4, 1e-12);
  EXPECT_EQ(c.x_min, 0.0);
  EXPECT_EQ(c.x_max, 1.0);
}

TEST(GapCurves, DuplicatedRecallKeepsLargestGap) {
  const Curve c = MakeTrapezoidCurve({{0.0, 0.1, 1}, {0.0, 0.3, 0.9}, {1.0, 0.3, 0}});
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_DOUBLE_EQ(c.points[0].y, 0.3);
  EXPECT_NEAR(c.auc, 0.3, 1e-15);
}

TEST(GapCurves, PlantedSpuriousModelHasLargerRecallGap) {
  double spurious_total = 0.0, main_total = 0.0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    sim::SyntheticConfig config;
    config.seed = seed;
    const auto data = sim::Generate(0.5, config);
    const auto spurious = sim::Predict(testing::SpuriousOnlyModel(config), data);
    const auto main_only = sim::Predict(testing::MainOnlyModel(config), data);
    spurious_total += AverageRecallGap(spurious, BalancedWeights::Uniform()).auc;
    main_total += AverageRecallGap(main_only, BalancedWeights::Uniform()).auc;
  }
  EXPECT_GT(spurious_total / 8, main_total / 8);
}

TEST(GapCurves, NeedsEverySplit) {
  const auto preds = PredictionsWithAccuracies({5, 5, 0, 5}, {5, 5, 0, 5});
  EXPECT_EQ(CodeOf([&] { AverageHallucinationGap(preds, BalancedWeights::Uniform()); }),
            ErrorCode::kEmptySplit);
}

TEST(CounterfactualMatrix, EightCellsAndIdentity) {
  const auto cells = CounterfactualCells();
  ASSERT_EQ(cells.size(), 8u);
  std::vector<FlipPair> identity;
  for (const auto& c : cells) {
    for (int i = 0; i < 5; ++i) {
      FlipPair p;
      p.example_id = std::to_string(i);
      p.transform = c.transform;
      p.source_split = c.source;
      p.prediction_original = p.prediction_counterfactual = i % 2 == 0;
      identity.push_back(p);
    }
  }
  const auto matrix = CounterfactualMatrix(identity);
  ASSERT_EQ(matrix.size(), 8u);
  for (const auto& c : matrix) {
    EXPECT_EQ(c.flip_probability, 0.0);
    EXPECT_EQ(c.n, 5u);
  }
  FlipPair bad;
  bad.transform = Transform::kAddMain;
  bad.source_split = Split::kBoth;
  EXPECT_EQ(CodeOf([&] { CounterfactualMatrix(std::span(&bad, 1)); }),
            ErrorCode::kInvalidTransform);
}

TEST(CounterfactualMatrix, PlantedModelsAreTransposes) {
  const sim::SyntheticConfig config = testing::CleanConfig(21);
  const auto data = sim::Generate(0.5, config);
  const auto spurious = CounterfactualMatrix(
      sim::CounterfactualFlips(testing::SpuriousOnlyModel(config), data, config));
  const auto main_only = CounterfactualMatrix(
      sim::CounterfactualFlips(testing::MainOnlyModel(config), data, config));
  ASSERT_EQ(spurious.size(), 8u);
  ASSERT_EQ(main_only.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    const bool toggles_spurious = testing::TogglesSpurious(spurious[i].transform);
    EXPECT_NEAR(spurious[i].flip_probability, toggles_spurious ? 1.0 : 0.0, 0.01);
    EXPECT_NEAR(main_only[i].flip_probability, toggles_spurious ? 0.0 : 1.0, 0.01);
  }
}

TEST(RelativeGapChange, Examples) {
  EXPECT_NEAR(RelativeGapChange(0.005, 0.0025).value, -50.0, 1e-9);
  EXPECT_EQ(RelativeGapChange(0.2, 0.2).value, 0.0);
  EXPECT_NEAR(RelativeGapChange(0.1, 0.3).value, 200.0, 1e-9);
  EXPECT_NEAR(RelativeGapChange(-0.1, 0.05).value, -50.0, 1e-9);
  const RelativeChange zero = RelativeGapChange(0.0, 0.02);
  EXPECT_TRUE(zero.absolute);
  EXPECT_DOUBLE_EQ(zero.value, 0.02);
}

}  // namespace
}  // namespace spirekit
