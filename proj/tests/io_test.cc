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

#include "spirekit/io.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "spirekit/error.h"
#include "test_support.h"

namespace spirekit::io {
namespace {

namespace fs = std::filesystem;

ErrorCode ParseCode(const std::function<void()>& f, std::string* what = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.code();
  }
  ADD_FAILURE() << "expected a spirekit::Error";
  return ErrorCode::kInvalidArgument;
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(0.454), "0.454");
  EXPECT_EQ(FormatDouble(2.0), "2");
  EXPECT_EQ(FormatDouble(std::nan("")), "nan");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    EXPECT_EQ(std::stod(FormatDouble(v)), v);
  }
}

TEST(Files, WriteThenRead) {
  const fs::path dir = fs::temp_directory_path() / "spirekit_io_test";
  fs::create_directories(dir);
  const std::string path = (dir / "x.txt").string();
  WriteFile(path, "hello\n");
  EXPECT_EQ(ReadFile(path), "hello\n");
  WriteFile(path, "again");
  EXPECT_EQ(ReadFile(path), "again");
  EXPECT_EQ(ParseCode([&] { ReadFile((dir / "missing").string()); }), ErrorCode::kIoError);
  fs::remove_all(dir);
}

TEST(Manifest, RoundTripWithCounterfactualsAndPayloads) {
  auto records = testing::RecordsFromCounts(2, 1, 1, 1);
  records[0].payload = {0.5, -1.25};
  records.push_back(MakeCounterfactual(records[0], Transform::kRemoveSpurious,
                                       ArtifactKind::kInpaintRemoval));
  std::stringstream ss;
  WriteManifest(ss, records);
  const auto back = ReadManifest(ss, "mem");
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].id, records[i].id);
    EXPECT_EQ(back[i].split(), records[i].split());
    EXPECT_EQ(back[i].provenance, records[i].provenance);
    EXPECT_EQ(back[i].artifact, records[i].artifact);
    EXPECT_EQ(back[i].source_id, records[i].source_id);
    EXPECT_EQ(back[i].payload, records[i].payload);
  }
}

TEST(Manifest, MinimalLinesAndErrors) {
  std::stringstream ok(
      "{\"id\":\"a\",\"main\":1,\"spurious\":0}\n\n"
      "{\"id\":\"b\",\"main\":true,\"spurious\":true,\"extra\":\"ignored\"}\n");
  const auto r = ReadManifest(ok, "m.jsonl");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].split(), Split::kJustMain);
  EXPECT_EQ(r[1].split(), Split::kBoth);

  std::string what;
  std::stringstream bad_json("{\"id\":\"a\",\"main\":1,\"spurious\":0}\n{oops\n");
  EXPECT_EQ(ParseCode([&] { ReadManifest(bad_json, "m.jsonl"); }, &what), ErrorCode::kParseError);
  EXPECT_NE(what.find("m.jsonl:2"), std::string::npos) << what;

  std::stringstream missing("{\"id\":\"a\",\"main\":1}\n");
  EXPECT_EQ(ParseCode([&] { ReadManifest(missing, "m"); }), ErrorCode::kParseError);

  std::stringstream inconsistent(
      "{\"id\":\"a\",\"main\":1,\"spurious\":0,\"artifact\":\"grey_box_removal\"}\n");
  EXPECT_THROW(ReadManifest(inconsistent, "m"), Error);
}

TEST(FlipPairs, RoundTripAndDefaults) {
  std::vector<FlipPairRow> rows(2);
  rows[0].pattern = {"tennis racket", "person"};
  rows[0].pair = {"e1", true, false, Transform::kRemoveSpurious, Split::kBoth};
  rows[1].pattern = {"car", "road"};
  rows[1].pair = {"e2", false, false, Transform::kAddMain, Split::kJustSpurious};
  std::stringstream ss;
  WriteFlipPairs(ss, rows);
  const auto back = ReadFlipPairs(ss, "p");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].pattern, rows[0].pattern);
  EXPECT_TRUE(back[0].pair.flipped());
  EXPECT_EQ(back[1].pair.transform, Transform::kAddMain);
  EXPECT_EQ(back[1].pair.source_split, Split::kJustSpurious);

  std::stringstream bare(
      "{\"id\":\"x\",\"pred_orig\":1,\"pred_cf\":0,\"transform\":\"remove_spurious\","
      "\"split\":\"Both\"}\n");
  const auto d = ReadFlipPairs(bare, "p");
  EXPECT_EQ(d[0].pattern, (PatternKey{"main", "spurious"}));

  std::stringstream bad(
      "{\"id\":\"x\",\"pred_orig\":1,\"pred_cf\":0,\"transform\":\"spin\",\"split\":\"Both\"}\n");
  EXPECT_EQ(ParseCode([&] { ReadFlipPairs(bad, "p"); }), ErrorCode::kParseError);
}

TEST(Plan, JsonRoundTripKeepsExactMasses) {
  const SplitCounts c(2, 8, 90, 100);
  AugmentationPlan plan = PlanSetting2(c);
  plan.mode = PlanMode::kSampled;
  plan.seed = 77;
  const std::string json = PlanToJson(plan, ComputeArtifactExposure(plan, c));
  EXPECT_NE(json.find("\"130/23\""), std::string::npos);
  EXPECT_NE(json.find("paste_addition"), std::string::npos);
  const AugmentationPlan back = PlanFromJson(json, "plan.json");
  EXPECT_EQ(back.entries, plan.entries);
  EXPECT_EQ(back.mode, PlanMode::kSampled);
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.strategy, "setting2");

  EXPECT_EQ(ParseCode([] { PlanFromJson("{\"mode\":\"expectation\"}", "p"); }),
            ErrorCode::kParseError);
  EXPECT_EQ(ParseCode([] { PlanFromJson("not json", "p"); }), ErrorCode::kParseError);
}

TEST(Predictions, AnyColumnOrder) {
  std::stringstream ss(
      "score,natural,id,label,split\n"
      "0.9,1,a,1,Both\n"
      "0.2,0,b,0,JustSpurious\n");
  const auto p = ReadPredictions(ss, "preds.csv");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].id, "a");
  EXPECT_DOUBLE_EQ(p[0].score, 0.9);
  EXPECT_FALSE(p[1].natural);

  std::stringstream round;
  WritePredictions(round, p);
  const auto again = ReadPredictions(round, "r");
  ASSERT_EQ(again.size(), 2u);
  EXPECT_EQ(again[1].split, Split::kJustSpurious);

  std::stringstream bad_label("id,split,label,score\na,Both,0,0.5\n");
  EXPECT_THROW(ReadPredictions(bad_label, "x"), Error);
  std::stringstream missing_col("id,split,score\na,Both,0.5\n");
  EXPECT_EQ(ParseCode([&] { ReadPredictions(missing_col, "x"); }), ErrorCode::kParseError);
  std::stringstream bad_score("id,split,label,score\na,Both,1,high\n");
  EXPECT_EQ(ParseCode([&] { ReadPredictions(bad_score, "x"); }), ErrorCode::kParseError);
}

TEST(Representations, ReadAndProbeRoundTrip) {
  std::stringstream ss("id,spurious_label,v0,v1\nr1,1,0.5,2\nr2,0,-1,3\n");
  const auto reps = ReadRepresentations(ss, "reps.csv");
  ASSERT_EQ(reps.size(), 2u);
  EXPECT_EQ(reps[0].values, (std::vector<double>{0.5, 2.0}));
  EXPECT_TRUE(reps[0].spurious_label);

  const LinearProbe probe{{0.25, -3.5}, 0.125};
  const LinearProbe back = ProbeFromJson(ProbeToJson(probe), "probe.json");
  EXPECT_EQ(back.w, probe.w);
  EXPECT_EQ(back.b, probe.b);
  EXPECT_THROW(ProbeFromJson("{\"w\":[1]}", "p"), Error);

  const std::vector<Projection> proj = {{"r1", {1.0, 2.0}, false, 3}};
  std::stringstream out;
  WriteProjections(out, proj);
  EXPECT_NE(out.str().find("r1"), std::string::npos);
  EXPECT_NE(out.str().find("steps"), std::string::npos);
}

TEST(Segments, ReadWithOptionalReference) {
  std::stringstream ss("id,image_id,r,g,b,reference_label\ns1,i1,10,20,30,1\ns2,i1,0,0,0,\n");
  const auto segs = ReadSegments(ss, "seg.csv");
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0].reference_label, true);
  EXPECT_FALSE(segs[1].reference_label.has_value());
  std::stringstream out_of_range("id,image_id,r,g,b\ns1,i1,300,0,0\n");
  EXPECT_THROW(ReadSegments(out_of_range, "seg.csv"), Error);
}

TEST(ClusterModel, JsonRoundTrip) {
  const auto f = testing::NineBlobs(3, 5.0, 2);
  ClusterModel model = ClusterSegments(f.segments);
  std::map<int, bool> labels;
  for (int c = 0; c < 9; ++c) labels[c] = c == 4;
  model = LabelClusters(model, labels);
  const ClusterModel back = ClusterModelFromJson(ClusterModelToJson(model), "m.json");
  EXPECT_EQ(back.assignment, model.assignment);
  EXPECT_EQ(back.labels, model.labels);
  ASSERT_EQ(back.training.size(), model.training.size());
  for (std::size_t i = 0; i < back.training.size(); ++i) {
    EXPECT_EQ(back.training[i].id, model.training[i].id);
    EXPECT_EQ(back.training[i].mean_color, model.training[i].mean_color);
  }
  EXPECT_EQ(back.linkage.size(), model.linkage.size());
}

TEST(Candidates, JsonRoundTrip) {
  std::vector<PatternScore> c(2);
  c[0].pair = {"airplane", "runway"};
  c[0].flip_rate = 0.507;
  c[0].n_both_train = 300;
  c[0].bias = 0.25;
  c[1].pair = {"tie", "cat"};
  c[1].flip_rate = 0.45;
  c[1].n_both_train = 30;
  const auto back = CandidatesFromJson(CandidatesToJson(c), "c.json");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].pair, c[0].pair);
  EXPECT_EQ(back[0].flip_rate, 0.507);
  EXPECT_EQ(back[0].bias, 0.25);
  EXPECT_FALSE(back[1].bias.has_value());
  EXPECT_NE(CandidatesToTsv(c).find("airplane\trunway"), std::string::npos);
}

TEST(Reports, DeterministicSerialization) {
  const auto preds = testing::TennisFixture();
  MetricsReport r;
  r.accuracies = PerSplitAccuracy(preds);
  r.gaps = ComputeGaps(r.accuracies);
  r.sweep = ThresholdSweep(preds, BalancedWeights::Uniform());
  r.precision_recall = PrecisionRecallCurve(preds, BalancedWeights::Uniform());
  const std::string a = MetricsReportToJson(r);
  EXPECT_EQ(a, MetricsReportToJson(r));
  EXPECT_NE(a.find("recall_gap"), std::string::npos);
  EXPECT_NE(MetricsReportToTsv(r).find("threshold"), std::string::npos);

  const std::string stats = StatsToJson(SplitCounts(90, 10, 10, 90), SplitCounts(90, 10, 10, 90),
                                        ComputeStats(SplitCounts(90, 10, 10, 90)));
  EXPECT_NE(stats.find("0.9"), std::string::npos);
}

}  // namespace
}  // namespace spirekit::io
