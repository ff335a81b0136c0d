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

#include "cli.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "spirekit/annotate.h"
#include "spirekit/balance.h"
#include "spirekit/dataset.h"
#include "spirekit/error.h"
#include "spirekit/identify.h"
#include "spirekit/io.h"
#include "spirekit/metrics.h"
#include "spirekit/project.h"
#include "spirekit/rational.h"
#include "spirekit/sim.h"

namespace spirekit::cli {
namespace {

namespace fs = std::filesystem;

struct Common {
  std::string out_dir;
  std::string format = "json";
  std::uint64_t seed = 0;
};

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string OrUndefined(const std::optional<double>& v, int digits = 4) {
  return v ? Fixed(*v, digits) : std::string("undefined");
}

void RequireFile(const std::string& path, const char* flag) {
  if (path.empty()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(flag) + " is required");
  }
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kIoError, "no such file: '" + path + "'");
  }
}

std::ifstream OpenInput(const std::string& path, const char* flag) {
  RequireFile(path, flag);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  return in;
}

fs::path OutputDir(const Common& c) {
  fs::path dir = c.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("SPIREKIT_OUT");
    dir = env != nullptr && *env != '\0' ? fs::path(env) : fs::path(".");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIoError, "output directory '" + dir.string() + "' is not usable");
  }
  return dir;
}

std::string Emit(const Common& c, const std::string& name, const std::string& contents) {
  const std::string path = (OutputDir(c) / name).string();
  io::WriteFile(path, contents);
  return path;
}

void AddCommon(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out_dir, "Output directory (default $SPIREKIT_OUT or .)");
  cmd->add_option("--format", c.format, "Extra plot-ready output")
      ->check(CLI::IsMember({"json", "tsv"}));
  cmd->add_option("--seed", c.seed, "Seed for all randomness");
}

bool WantsTsv(const Common& c) { return c.format == "tsv"; }

std::vector<double> ParseDoubles(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(flag) + ": not a number list: '" + text + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------- stats

struct StatsArgs {
  Common common;
  std::string manifest;
};

int CmdStats(const StatsArgs& a, std::ostream& out) {
  auto in = OpenInput(a.manifest, "--manifest");
  const std::vector<ExampleRecord> records = io::ReadManifest(in, a.manifest);
  const SplitCounts natural = CountSplits(records, false);
  const SplitCounts all = CountSplits(records, true);
  const DistributionStats stats = ComputeStats(natural);
  out << "split\tnatural\tall\n";
  for (Split s : kAllSplits) {
    out << SplitName(s) << '\t' << ToString(natural[s]) << '\t' << ToString(all[s]) << '\n';
  }
  out << "total\t" << ToString(natural.total()) << '\t' << ToString(all.total()) << '\n';
  out << "P(Main) = " << Fixed(stats.p_main) << "\n";
  out << "P(Spurious) = " << Fixed(stats.p_spurious) << "\n";
  out << "P(Spurious|Main) = " << OrUndefined(stats.p_spurious_given_main) << "\n";
  out << "p = P(Main|Spurious) = " << OrUndefined(stats.p) << "\n";
  out << "bias = " << OrUndefined(stats.bias) << "\n";
  Emit(a.common, "stats.json", io::StatsToJson(natural, all, stats));
  return kExitOk;
}

// ------------------------------------------------------------- identify

struct IdentifyArgs {
  Common common;
  std::string pairs;
  std::string manifest;
  std::int64_t min_both = kDefaultMinBoth;
  double min_flip = kDefaultMinFlip;
};

int CmdIdentify(const IdentifyArgs& a, std::ostream& out) {
  auto in = OpenInput(a.pairs, "--pairs");
  const std::vector<io::FlipPairRow> rows = io::ReadFlipPairs(in, a.pairs);
  std::map<PatternKey, std::vector<FlipPair>> by_pattern;
  for (const io::FlipPairRow& r : rows) by_pattern[r.pattern].push_back(r.pair);

  std::map<PatternKey, PairStats> stats;
  if (!a.manifest.empty()) {
    auto min = OpenInput(a.manifest, "--manifest");
    const SplitCounts counts = CountSplits(io::ReadManifest(min, a.manifest), false);
    PairStats ps;
    ps.n_both_train = static_cast<std::int64_t>(ToDouble(counts[Split::kBoth]));
    ps.bias = ComputeStats(counts).bias;
    for (const auto& [key, pairs] : by_pattern) stats[key] = ps;
  }
  const std::vector<PatternScore> scores = ScorePatterns(by_pattern, stats);
  const std::vector<PatternScore> candidates = FilterCandidates(scores, a.min_both, a.min_flip);

  out << "main\tspurious\tflip_rate\tn_both_train\tbias\tcandidate\n";
  for (const PatternScore& s : scores) {
    const bool kept = std::any_of(candidates.begin(), candidates.end(),
                                  [&](const PatternScore& c) { return c.pair == s.pair; });
    out << s.pair.main << '\t' << s.pair.spurious << '\t' << Fixed(s.flip_rate) << '\t'
        << s.n_both_train << '\t' << OrUndefined(s.bias) << '\t' << (kept ? "yes" : "no")
        << '\n';
  }
  out << candidates.size() << " candidate pattern(s)\n";
  Emit(a.common, "candidates.json", io::CandidatesToJson(candidates));
  if (WantsTsv(a.common)) Emit(a.common, "candidates.tsv", io::CandidatesToTsv(candidates));
  return kExitOk;
}

// --------------------------------------------------------------- triage

struct TriageArgs {
  Common common;
  std::string candidates;
  std::string ledger;
};

int CmdTriage(const TriageArgs& a, std::istream& in, std::ostream& out) {
  RequireFile(a.candidates, "--candidates");
  if (a.ledger.empty()) throw Error(ErrorCode::kInvalidArgument, "--ledger is required");
  const std::vector<PatternScore> candidates =
      io::CandidatesFromJson(io::ReadFile(a.candidates), a.candidates);

  TriageLedger ledger;
  if (fs::exists(a.ledger)) {
    std::ifstream lin(a.ledger);
    if (!lin) throw Error(ErrorCode::kIoError, "cannot open '" + a.ledger + "'");
    ledger = TriageLedger::Read(lin);
  }

  std::vector<const PatternScore*> pending;
  for (const PatternScore& c : candidates) {
    if (ledger.Get(c.pair) == TriageLabel::kUnreviewed) pending.push_back(&c);
  }
  if (!pending.empty()) {
    std::ofstream append(a.ledger, std::ios::app);
    if (!append) throw Error(ErrorCode::kIoError, "cannot append to '" + a.ledger + "'");
    std::size_t i = 0;
    for (const PatternScore* c : pending) {
      ++i;
      out << "[" << i << "/" << pending.size() << "] " << c->pair.main << " / "
          << c->pair.spurious << "  flip_rate=" << Fixed(c->flip_rate)
          << "  bias=" << OrUndefined(c->bias) << "  n_both=" << c->n_both_train << "\n"
          << "label? [s]purious / [v]alid / [k] skip / [q] quit (text after the letter is a note): "
          << std::flush;
      std::string line;
      if (!std::getline(in, line)) {
        out << "\n";
        break;
      }
      std::string word = line.substr(0, line.find(' '));
      std::string note = line.size() > word.size() ? line.substr(word.size() + 1) : "";
      if (word == "q" || word == "quit") break;
      TriageLabel label = TriageLabel::kUnreviewed;
      if (word == "s" || word == "spurious") label = TriageLabel::kSpurious;
      if (word == "v" || word == "valid") label = TriageLabel::kValid;
      if (label == TriageLabel::kUnreviewed) continue;
      ledger.Set(c->pair, label, note);
      append << TriageLedger::FormatLine(c->pair, label, note) << "\n" << std::flush;
    }
  }

  const TriageResult result = TriageApply(candidates, ledger);
  for (const PatternKey& k : result.unreviewed) {
    out << "warning: unreviewed pattern " << k.main << " / " << k.spurious << " excluded\n";
  }
  out << result.spurious.size() << " spurious pattern(s) to mitigate\n";
  for (const PatternScore& s : result.spurious) {
    out << "  " << s.pair.main << " / " << s.pair.spurious << "\n";
  }
  Emit(a.common, "triage.json", io::CandidatesToJson(result.spurious));
  return kExitOk;
}

// ----------------------------------------------------------------- plan

struct PlanArgs {
  Common common;
  std::string manifest;
  std::string setting;
  std::string scale = "1";
  std::string mode = "expectation";
};

int CmdPlan(const PlanArgs& a, std::ostream& out) {
  auto in = OpenInput(a.manifest, "--manifest");
  const SplitCounts counts = CountSplits(io::ReadManifest(in, a.manifest), false);
  AugmentationPlan plan;
  if (a.setting == "1") {
    plan = PlanSetting1(counts);
  } else if (a.setting == "2") {
    plan = PlanSetting2(counts);
  } else if (a.setting == "3") {
    plan = PlanSetting3(counts);
  } else if (a.setting == "qcec") {
    plan = PlanQcec(counts);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "--setting must be 1, 2, 3 or qcec, got '" + a.setting + "'");
  }
  Rational factor;
  try {
    factor = ParseRational(a.scale);
  } catch (const Error&) {
    throw Error(ErrorCode::kInvalidFactor, "--scale is not a number: '" + a.scale + "'");
  }
  if (factor != 1) plan = ScalePlan(plan, factor);
  const auto mode = ParsePlanMode(a.mode);
  if (!mode) throw Error(ErrorCode::kInvalidArgument, "--mode must be expectation or sampled");
  plan.mode = *mode;
  plan.seed = a.common.seed;
  ValidatePlan(plan, counts);
  const ArtifactExposure exposure = ComputeArtifactExposure(plan, counts);
  const SplitCounts expected = ExpectedCounts(counts, plan);

  out << "strategy " << plan.strategy << ", mode " << PlanModeName(plan.mode) << "\n";
  if (plan.delta) {
    out << "delta = " << ToString(plan.delta->delta) << " ("
        << DeltaBranchName(plan.delta->branch) << (plan.delta->exact ? ", exact" : ", approximate")
        << ")\n";
  }
  for (const PlanEntry& e : plan.entries) {
    out << SplitName(e.source) << " -> " << SplitName(e.target) << " via "
        << TransformName(e.transform) << ": " << ToString(e.expected_count) << "\n";
  }
  out << "expected split sizes:";
  for (Split s : kAllSplits) out << " " << SplitName(s) << "=" << ToString(expected[s]);
  out << "\n";
  for (const auto& [kind, entry] : exposure) {
    out << "P(Main | " << ArtifactName(kind) << ") = " << Fixed(entry.p_main) << "\n";
  }
  Emit(a.common, "plan.json", io::PlanToJson(plan, exposure));
  return kExitOk;
}

// ---------------------------------------------------------------- apply

struct ApplyArgs {
  Common common;
  std::string manifest;
  std::string plan;
};

int CmdApply(const ApplyArgs& a, std::ostream& out) {
  auto in = OpenInput(a.manifest, "--manifest");
  const std::vector<ExampleRecord> records = io::ReadManifest(in, a.manifest);
  RequireFile(a.plan, "--plan");
  const AugmentationPlan plan = io::PlanFromJson(io::ReadFile(a.plan), a.plan);
  ValidatePlan(plan, CountSplits(records, false));
  const std::vector<ExampleRecord> augmented =
      ApplyPlan(plan, records, AbstractCounterfact(), a.common.seed);
  const SplitCounts tally = CountSplits(augmented, true);
  out << "records: " << records.size() << " -> " << augmented.size() << "\n";
  out << "split sizes:";
  for (Split s : kAllSplits) out << " " << SplitName(s) << "=" << ToString(tally[s]);
  out << "\n";
  std::ostringstream manifest;
  io::WriteManifest(manifest, augmented);
  Emit(a.common, "augmented.jsonl", manifest.str());
  return kExitOk;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  Common common;
  std::string predictions;
  double threshold = kDefaultDecisionThreshold;
};

int CmdEval(const EvalArgs& a, std::ostream& out) {
  auto in = OpenInput(a.predictions, "--predictions");
  std::vector<PredictionRecord> preds;
  for (PredictionRecord& p : io::ReadPredictions(in, a.predictions)) {
    if (p.natural) preds.push_back(std::move(p));
  }
  if (preds.empty()) throw Error(ErrorCode::kEmptyDataset, "no natural predictions");
  const auto positives = std::count_if(preds.begin(), preds.end(),
                                       [](const PredictionRecord& p) { return p.label; });
  io::MetricsReport report;
  report.p_main = static_cast<double>(positives) / static_cast<double>(preds.size());
  const BalancedWeights weights(report.p_main);
  report.accuracies = PerSplitAccuracy(preds, a.threshold, &report.warnings);
  report.gaps = ComputeGaps(report.accuracies);
  report.balanced_accuracy = ReweightedAccuracy(report.accuracies, weights);
  report.sweep = ThresholdSweep(preds, weights);
  report.precision_recall = PrecisionRecallCurve(preds, weights);
  report.average_precision = report.precision_recall.auc;
  report.recall_gap_curve = AverageRecallGap(preds, weights);
  report.hallucination_gap_curve = AverageHallucinationGap(preds, weights);

  for (const std::string& w : report.warnings) out << "warning: " << w << "\n";
  out << "split\taccuracy\tn\n";
  for (Split s : kAllSplits) {
    out << SplitName(s) << '\t' << Fixed(report.accuracies[s]) << '\t'
        << report.accuracies.n[Index(s)] << '\n';
  }
  out << "recall gap = " << Fixed(report.gaps.recall_gap, 3) << "\n";
  out << "hallucination gap = " << Fixed(report.gaps.hallucination_gap, 3) << "\n";
  out << "balanced accuracy = " << Fixed(report.balanced_accuracy) << "\n";
  out << "balanced AP = " << Fixed(report.average_precision) << "\n";
  out << "average recall gap = " << Fixed(report.recall_gap_curve.auc) << "\n";
  out << "average hallucination gap = " << Fixed(report.hallucination_gap_curve.auc) << "\n";
  Emit(a.common, "report.json", io::MetricsReportToJson(report));
  if (WantsTsv(a.common)) Emit(a.common, "report.tsv", io::MetricsReportToTsv(report));
  return kExitOk;
}

// --------------------------------------------------------------- cfeval

struct CfEvalArgs {
  Common common;
  std::string pairs;
};

int CmdCfEval(const CfEvalArgs& a, std::ostream& out) {
  auto in = OpenInput(a.pairs, "--pairs");
  std::map<PatternKey, std::vector<FlipPair>> by_pattern;
  for (const io::FlipPairRow& r : io::ReadFlipPairs(in, a.pairs)) {
    by_pattern[r.pattern].push_back(r.pair);
  }
  if (by_pattern.empty()) throw Error(ErrorCode::kEmptyDataset, "no flip pairs");
  std::vector<io::PatternMatrix> matrices;
  for (const auto& [key, pairs] : by_pattern) {
    matrices.push_back({key, CounterfactualMatrix(pairs)});
  }
  for (const io::PatternMatrix& m : matrices) {
    out << m.pattern.main << " / " << m.pattern.spurious << "\n";
    for (const CounterfactualCell& c : m.cells) {
      out << "  " << SplitName(c.source) << " --" << TransformName(c.transform) << "--> "
          << SplitName(c.target) << "  n=" << c.n << "  P(flip)=" << Fixed(c.flip_probability)
          << "\n";
    }
  }
  Emit(a.common, "cf_matrix.json", io::PatternMatricesToJson(matrices));
  if (WantsTsv(a.common)) Emit(a.common, "cf_matrix.tsv", io::PatternMatricesToTsv(matrices));
  return kExitOk;
}

// -------------------------------------------------------------- project

struct ProjectArgs {
  Common common;
  std::string representations;
  std::string probe;
  ProjectionParams params;
};

int CmdProject(const ProjectArgs& a, std::ostream& out) {
  auto in = OpenInput(a.representations, "--representations");
  const std::vector<Representation> reps = io::ReadRepresentations(in, a.representations);
  LinearProbe probe;
  if (!a.probe.empty()) {
    RequireFile(a.probe, "--probe");
    probe = io::ProbeFromJson(io::ReadFile(a.probe), a.probe);
  } else {
    const ProbeFit fit = FitProbe(reps);
    if (!fit.converged) {
      out << "warning: probe fit stopped after " << fit.epochs
          << " epochs with gradient norm " << fit.gradient_norm << "\n";
    }
    probe = fit.probe;
    Emit(a.common, "probe.json", io::ProbeToJson(probe));
  }
  const std::vector<Projection> projected = ProjectDataset(reps, probe, a.params);
  std::size_t flipped = 0;
  std::int64_t steps = 0;
  for (const Projection& p : projected) {
    if (probe.Predict(p.values) == p.label) ++flipped;
    steps += p.steps;
  }
  out << "projected " << projected.size() << " representation(s); " << flipped
      << " now classified as the flipped label\n";
  if (!projected.empty()) {
    out << "mean steps = "
        << Fixed(static_cast<double>(steps) / static_cast<double>(projected.size()), 2) << "\n";
  }
  std::ostringstream csv;
  io::WriteProjections(csv, projected);
  Emit(a.common, "projected.csv", csv.str());
  return kExitOk;
}

// ------------------------------------------------------------- annotate

struct AnnotateArgs {
  Common common;
  std::string segments;
  std::string model;
  std::string labels;
  int neighbors = kDefaultNeighbors;
};

// Lines of `<cluster> <sticker|not_sticker>`; '#' starts a comment.
std::map<int, bool> ReadClusterLabels(const std::string& path) {
  std::ifstream in = OpenInput(path, "--labels");
  std::map<int, bool> labels;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string cluster, label;
    if (!(ss >> cluster)) continue;
    if (!(ss >> label) || (label != "sticker" && label != "not_sticker")) {
      throw Error(ErrorCode::kParseError, path + ":" + std::to_string(number) +
                                              ": expected '<cluster> sticker|not_sticker'");
    }
    try {
      labels[std::stoi(cluster)] = label == "sticker";
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParseError,
                  path + ":" + std::to_string(number) + ": bad cluster id '" + cluster + "'");
    }
  }
  return labels;
}

int CmdAnnotate(const AnnotateArgs& a, std::ostream& out) {
  auto in = OpenInput(a.segments, "--segments");
  const std::vector<Segment> segments = io::ReadSegments(in, a.segments);
  ClusterModel model;
  if (!a.model.empty()) {
    RequireFile(a.model, "--model");
    model = io::ClusterModelFromJson(io::ReadFile(a.model), a.model);
  } else {
    model = ClusterSegments(segments);
  }
  if (!a.labels.empty()) model = LabelClusters(std::move(model), ReadClusterLabels(a.labels));

  out << "cluster\tsize\tmean_r\tmean_g\tmean_b\tlabel\n";
  for (int c = 0; c < kNumClusters; ++c) {
    const std::vector<std::size_t> members = model.Members(c);
    Color mean{};
    for (std::size_t i : members) {
      for (std::size_t k = 0; k < 3; ++k) mean[k] += model.training[i].mean_color[k];
    }
    for (double& m : mean) m /= members.empty() ? 1.0 : static_cast<double>(members.size());
    const auto& label = model.labels[static_cast<std::size_t>(c)];
    out << c << '\t' << members.size() << '\t' << Fixed(mean[0], 1) << '\t' << Fixed(mean[1], 1)
        << '\t' << Fixed(mean[2], 1) << '\t'
        << (label ? (*label ? "sticker" : "not_sticker") : "unlabeled") << '\n';
  }
  Emit(a.common, "cluster_model.json", io::ClusterModelToJson(model));
  if (!model.labeled()) {
    out << "label every cluster (file of '<cluster> sticker|not_sticker' lines) and rerun "
           "with --labels\n";
    return kExitOk;
  }

  std::ostringstream csv;
  csv << "id,image_id,cluster,sticker\n";
  // std::vector<bool> cannot back a span.
  auto predicted = std::make_unique<bool[]>(segments.size());
  std::vector<std::optional<bool>> references;
  for (const Segment& s : segments) {
    const int c = KnnCluster(model, s.mean_color, a.neighbors);
    const bool sticker = *model.labels[static_cast<std::size_t>(c)];
    csv << s.id << ',' << s.image_id << ',' << c << ',' << (sticker ? 1 : 0) << '\n';
    predicted[references.size()] = sticker;
    references.push_back(s.reference_label);
  }
  Emit(a.common, "annotations.csv", csv.str());
  if (std::any_of(references.begin(), references.end(),
                  [](const auto& r) { return r.has_value(); })) {
    const AnnotationQuality q =
        ScoreAnnotations(std::span<const bool>(predicted.get(), segments.size()), references);
    out << "annotation precision = " << OrUndefined(q.precision)
        << ", recall = " << OrUndefined(q.recall) << " over " << q.scored << " segment(s)\n";
    Emit(a.common, "annotation_quality.json", io::AnnotationQualityToJson(q));
  }
  return kExitOk;
}

// ------------------------------------------------------------- simulate

struct SimulateArgs {
  Common common;
  int trials = 8;
  std::string grid;
  std::string strategies = "spire,qcec";
  sim::SyntheticConfig config;
  sim::ControlledOptions options;
  std::string plan_mode = "sampled";
};

int CmdSimulate(SimulateArgs a, std::ostream& out) {
  a.config.seed = a.common.seed;
  const std::vector<double> grid =
      a.grid.empty() ? sim::DefaultGrid() : ParseDoubles(a.grid, "--grid");
  std::vector<sim::Strategy> strategies;
  std::stringstream ss(a.strategies);
  std::string name;
  while (std::getline(ss, name, ',')) {
    const auto s = sim::ParseStrategy(name);
    if (!s) throw Error(ErrorCode::kInvalidArgument, "unknown strategy '" + name + "'");
    strategies.push_back(*s);
  }
  const auto mode = ParsePlanMode(a.plan_mode);
  if (!mode) throw Error(ErrorCode::kInvalidArgument, "--plan-mode must be expectation or sampled");
  a.options.plan_mode = *mode;

  const sim::SweepResult sweep =
      sim::RunControlled(grid, a.trials, a.config, strategies, a.options);
  out << "p\tstrategy\tBA\t|recall gap|\t|halluc. gap|\tBA diff (sd)\tgrey w\tpaste w\n";
  for (const sim::AggregateRow& r : sweep.Aggregate(a.config)) {
    out << Fixed(r.p, 3) << '\t' << sim::StrategyName(r.strategy) << '\t'
        << Fixed(r.balanced_accuracy.mean) << '\t' << Fixed(r.abs_recall_gap.mean) << '\t'
        << Fixed(r.abs_hallucination_gap.mean) << '\t' << Fixed(r.balanced_accuracy_diff.mean)
        << " (" << Fixed(r.balanced_accuracy_diff.sd) << ")\t" << Fixed(r.grey_box_weight.mean)
        << '\t' << Fixed(r.paste_weight.mean) << '\n';
  }
  try {
    const sim::AcceptDecision d = sim::BenchmarkAccept(sweep);
    out << "baseline BA drop: low end " << Fixed(d.drop_low) << ", high end "
        << Fixed(d.drop_high) << " -> " << (d.accepted ? "accepted" : "rejected") << "\n";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kIncompleteSweep) throw;
    out << "acceptance check skipped: " << e.what() << "\n";
  }
  Emit(a.common, "sweep.json", io::SweepToJson(sweep, a.config));
  if (WantsTsv(a.common)) Emit(a.common, "sweep.tsv", io::SweepToTsv(sweep, a.config));
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"spirekit: find spurious patterns, plan counterfactual augmentation, and "
               "audit per-split gaps"};
  app.name("spirekit");
  app.require_subcommand(1);

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "Split counts and distribution statistics");
  c_stats->add_option("--manifest", stats.manifest, "Manifest JSONL")->required();
  AddCommon(c_stats, stats.common);

  IdentifyArgs identify;
  auto* c_identify = app.add_subcommand("identify", "Score and filter candidate patterns");
  c_identify->add_option("--pairs", identify.pairs, "Flip-pair JSONL")->required();
  c_identify->add_option("--manifest", identify.manifest, "Training manifest for Both counts");
  c_identify->add_option("--min-both", identify.min_both, "Minimum training Both images");
  c_identify->add_option("--min-flip", identify.min_flip, "Minimum flip rate");
  AddCommon(c_identify, identify.common);

  TriageArgs triage;
  auto* c_triage = app.add_subcommand("triage", "Label candidate patterns spurious or valid");
  c_triage->add_option("--candidates", triage.candidates, "candidates.json from identify")
      ->required();
  c_triage->add_option("--ledger", triage.ledger, "Ledger file (created if missing)")
      ->required();
  AddCommon(c_triage, triage.common);

  PlanArgs plan;
  auto* c_plan = app.add_subcommand("plan", "Build an augmentation plan");
  c_plan->add_option("--manifest", plan.manifest, "Manifest JSONL")->required();
  c_plan->add_option("--setting", plan.setting, "1, 2, 3 or qcec")->required();
  c_plan->add_option("--scale", plan.scale, "Scale factor in (0, 1]");
  c_plan->add_option("--mode", plan.mode, "expectation or sampled");
  AddCommon(c_plan, plan.common);

  ApplyArgs apply;
  auto* c_apply = app.add_subcommand("apply", "Materialize a plan over a manifest");
  c_apply->add_option("--manifest", apply.manifest, "Manifest JSONL")->required();
  c_apply->add_option("--plan", apply.plan, "plan.json from plan")->required();
  AddCommon(c_apply, apply.common);

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Per-split accuracy, gaps and balanced metrics");
  c_eval->add_option("--predictions", eval.predictions, "Predictions CSV")->required();
  c_eval->add_option("--threshold", eval.threshold, "Decision threshold");
  AddCommon(c_eval, eval.common);

  CfEvalArgs cfeval;
  auto* c_cfeval = app.add_subcommand("cfeval", "Counterfactual flip matrix");
  c_cfeval->add_option("--pairs", cfeval.pairs, "Flip-pair JSONL")->required();
  AddCommon(c_cfeval, cfeval.common);

  ProjectArgs project;
  auto* c_project = app.add_subcommand("project", "Project representations across a probe");
  c_project->add_option("--representations", project.representations, "Representations CSV")
      ->required();
  c_project->add_option("--probe", project.probe, "Probe JSON (fit when omitted)");
  c_project->add_option("--confidence", project.params.confidence, "Confidence threshold c");
  c_project->add_option("--step", project.params.step, "Step size s");
  c_project->add_option("--max-iters", project.params.max_iters, "Step budget");
  AddCommon(c_project, project.common);

  AnnotateArgs annotate;
  auto* c_annotate = app.add_subcommand("annotate", "Cluster segments and label stickers");
  c_annotate->add_option("--segments", annotate.segments, "Segments CSV")->required();
  c_annotate->add_option("--model", annotate.model, "Existing cluster_model.json");
  c_annotate->add_option("--labels", annotate.labels, "Cluster labels file");
  c_annotate->add_option("--neighbors", annotate.neighbors, "k for k-NN");
  AddCommon(c_annotate, annotate.common);

  SimulateArgs simulate;
  auto* c_sim = app.add_subcommand("simulate", "Controlled p-sweep on synthetic data");
  c_sim->add_option("--trials", simulate.trials, "Trials per p");
  c_sim->add_option("--grid", simulate.grid, "Comma-separated p values");
  c_sim->add_option("--strategies", simulate.strategies, "Comma list of spire, qcec");
  c_sim->add_option("--n", simulate.config.n, "Training examples per trial");
  c_sim->add_option("--n-test", simulate.options.n_test, "Test examples per trial");
  c_sim->add_option("--epochs", simulate.options.train.epochs, "Gradient-descent epochs");
  c_sim->add_option("--lr", simulate.options.train.learning_rate, "Learning rate");
  c_sim->add_option("--plan-mode", simulate.plan_mode, "expectation or sampled");
  AddCommon(c_sim, simulate.common);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (c_stats->parsed()) return CmdStats(stats, out);
    if (c_identify->parsed()) return CmdIdentify(identify, out);
    if (c_triage->parsed()) return CmdTriage(triage, in, out);
    if (c_plan->parsed()) return CmdPlan(plan, out);
    if (c_apply->parsed()) return CmdApply(apply, out);
    if (c_eval->parsed()) return CmdEval(eval, out);
    if (c_cfeval->parsed()) return CmdCfEval(cfeval, out);
    if (c_project->parsed()) return CmdProject(project, out);
    if (c_annotate->parsed()) return CmdAnnotate(annotate, out);
    if (c_sim->parsed()) return CmdSimulate(simulate, out);
  } catch (const Error& e) {
    err << "spirekit: " << e.what() << "\n";
    return IsInfeasible(e.code()) ? kExitInfeasible : kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace spirekit::cli
