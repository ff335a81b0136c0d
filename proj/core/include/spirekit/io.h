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

#ifndef SPIREKIT_IO_H_
#define SPIREKIT_IO_H_

#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spirekit/annotate.h"
#include "spirekit/balance.h"
#include "spirekit/dataset.h"
#include "spirekit/identify.h"
#include "spirekit/metrics.h"
#include "spirekit/project.h"
#include "spirekit/sim.h"

// Readers take a `source` name that prefixes every ParseError so the
// offending file can be reported. Writers are deterministic: identical
// inputs produce identical bytes.
namespace spirekit::io {

// Shortest decimal that round-trips to the same double.
std::string FormatDouble(double v);

std::string ReadFile(const std::string& path);
// Writes via a temporary file and rename. Throws IoError.
void WriteFile(const std::string& path, std::string_view contents);

// Manifest JSONL. A `payload` array of numbers is read and written when
// present; other unknown keys are ignored.
std::vector<ExampleRecord> ReadManifest(std::istream& in, std::string_view source);
void WriteManifest(std::ostream& out, std::span<const ExampleRecord> records);

// One flip-pair line. `main` and `spurious` name the pattern when a file
// holds several; they default to "main" and "spurious".
struct FlipPairRow {
  PatternKey pattern;
  FlipPair pair;
};

std::vector<FlipPairRow> ReadFlipPairs(std::istream& in, std::string_view source);
void WriteFlipPairs(std::ostream& out, std::span<const FlipPairRow> rows);

std::string PlanToJson(const AugmentationPlan& plan,
                       const std::optional<ArtifactExposure>& exposure);
AugmentationPlan PlanFromJson(std::string_view text, std::string_view source);

// Header `id,split,label,score,natural`; columns may appear in any order.
std::vector<PredictionRecord> ReadPredictions(std::istream& in, std::string_view source);
void WritePredictions(std::ostream& out, std::span<const PredictionRecord> preds);

// Header `id,spurious_label,v0,...,v{d-1}`.
std::vector<Representation> ReadRepresentations(std::istream& in, std::string_view source);
void WriteProjections(std::ostream& out, std::span<const Projection> projections);

std::string ProbeToJson(const LinearProbe& probe);
LinearProbe ProbeFromJson(std::string_view text, std::string_view source);

// Header `id,image_id,r,g,b[,reference_label]`. An empty reference cell
// means unlabeled.
std::vector<Segment> ReadSegments(std::istream& in, std::string_view source);

std::string ClusterModelToJson(const ClusterModel& model);
ClusterModel ClusterModelFromJson(std::string_view text, std::string_view source);

std::string CandidatesToJson(std::span<const PatternScore> candidates);
std::string CandidatesToTsv(std::span<const PatternScore> candidates);
std::vector<PatternScore> CandidatesFromJson(std::string_view text, std::string_view source);

std::string MatrixToJson(std::span<const CounterfactualCell> cells);
std::string MatrixToTsv(std::span<const CounterfactualCell> cells);

struct PatternMatrix {
  PatternKey pattern;
  std::vector<CounterfactualCell> cells;
};

std::string PatternMatricesToJson(std::span<const PatternMatrix> matrices);
std::string PatternMatricesToTsv(std::span<const PatternMatrix> matrices);

std::string StatsToJson(const SplitCounts& natural, const SplitCounts& all,
                        const DistributionStats& stats);

std::string AnnotationQualityToJson(const AnnotationQuality& quality);

struct MetricsReport {
  SplitAccuracies accuracies;
  GapReport gaps;
  double p_main = 0.5;
  double balanced_accuracy = 0.0;
  double average_precision = 0.0;
  std::vector<SweepRow> sweep;
  Curve precision_recall;
  Curve recall_gap_curve;
  Curve hallucination_gap_curve;
  std::vector<std::string> warnings;
};

std::string MetricsReportToJson(const MetricsReport& report);
// Per-threshold table for plotting.
std::string MetricsReportToTsv(const MetricsReport& report);

std::string SweepToJson(const sim::SweepResult& sweep, const sim::SyntheticConfig& config);
// One row per (p, strategy) aggregate.
std::string SweepToTsv(const sim::SweepResult& sweep, const sim::SyntheticConfig& config);

}  // namespace spirekit::io

#endif  // SPIREKIT_IO_H_
