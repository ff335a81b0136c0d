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

#include "spirekit/dataset.h"

#include <string>

#include "spirekit/error.h"

namespace spirekit {

std::string_view SplitName(Split s) {
  switch (s) {
    case Split::kBoth: return "Both";
    case Split::kJustMain: return "JustMain";
    case Split::kJustSpurious: return "JustSpurious";
    case Split::kNeither: return "Neither";
  }
  return "?";
}

std::optional<Split> ParseSplit(std::string_view name) {
  for (Split s : kAllSplits) {
    if (SplitName(s) == name) return s;
  }
  if (name == "Just Main" || name == "just_main") return Split::kJustMain;
  if (name == "Just Spurious" || name == "just_spurious") return Split::kJustSpurious;
  if (name == "both") return Split::kBoth;
  if (name == "neither") return Split::kNeither;
  return std::nullopt;
}

std::string_view TransformName(Transform t) {
  switch (t) {
    case Transform::kRemoveSpurious: return "remove_spurious";
    case Transform::kRemoveMain: return "remove_main";
    case Transform::kAddSpurious: return "add_spurious";
    case Transform::kAddMain: return "add_main";
  }
  return "?";
}

std::optional<Transform> ParseTransform(std::string_view name) {
  for (Transform t : kAllTransforms) {
    if (TransformName(t) == name) return t;
  }
  return std::nullopt;
}

std::optional<Split> ApplyTransform(Split source, Transform t) {
  bool main = HasMain(source);
  bool spurious = HasSpurious(source);
  switch (t) {
    case Transform::kRemoveSpurious:
      if (!spurious) return std::nullopt;
      spurious = false;
      break;
    case Transform::kRemoveMain:
      if (!main) return std::nullopt;
      main = false;
      break;
    case Transform::kAddSpurious:
      if (spurious) return std::nullopt;
      spurious = true;
      break;
    case Transform::kAddMain:
      if (main) return std::nullopt;
      main = true;
      break;
  }
  return AssignSplit(main, spurious);
}

std::optional<Transform> TransformBetween(Split source, Split target) {
  for (Transform t : kAllTransforms) {
    if (ApplyTransform(source, t) == target) return t;
  }
  return std::nullopt;
}

std::string_view ArtifactName(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::kNone: return "none";
    case ArtifactKind::kGreyBoxRemoval: return "grey_box_removal";
    case ArtifactKind::kInpaintRemoval: return "inpaint_removal";
    case ArtifactKind::kPasteAddition: return "paste_addition";
  }
  return "?";
}

std::optional<ArtifactKind> ParseArtifact(std::string_view name) {
  for (ArtifactKind k : {ArtifactKind::kNone, ArtifactKind::kGreyBoxRemoval,
                         ArtifactKind::kInpaintRemoval,
                         ArtifactKind::kPasteAddition}) {
    if (ArtifactName(k) == name) return k;
  }
  return std::nullopt;
}

void ValidateRecord(const ExampleRecord& record) {
  const bool natural = record.natural();
  const bool no_artifact = record.artifact == ArtifactKind::kNone;
  const bool no_source = !record.source_id.has_value();
  if (natural != no_artifact || natural != no_source) {
    throw Error(ErrorCode::kInvalidArgument,
                "record '" + record.id +
                    "': natural provenance requires artifact 'none' and no "
                    "source_id (and counterfactuals require both)");
  }
}

ExampleRecord MakeCounterfactual(const ExampleRecord& source, Transform t,
                                 ArtifactKind removal_artifact) {
  const auto target = ApplyTransform(source.split(), t);
  if (!target) {
    throw Error(ErrorCode::kInvalidTransform,
                std::string(TransformName(t)) + " does not apply to split " +
                    std::string(SplitName(source.split())) + " (record '" +
                    source.id + "')");
  }
  ExampleRecord cf;
  cf.id = source.id + "~" + std::string(TransformName(t));
  cf.main = HasMain(*target);
  cf.spurious = HasSpurious(*target);
  cf.provenance = Provenance::kCounterfactual;
  cf.artifact = IsRemoval(t) ? removal_artifact : ArtifactKind::kPasteAddition;
  cf.source_id = source.source_id.value_or(source.id);
  cf.payload = source.payload;
  return cf;
}

SplitCounts::SplitCounts(Rational both, Rational just_main,
                         Rational just_spurious, Rational neither)
    : counts_{std::move(both), std::move(just_main), std::move(just_spurious),
              std::move(neither)} {}

Rational SplitCounts::total() const {
  return counts_[0] + counts_[1] + counts_[2] + counts_[3];
}

SplitCounts CountSplits(std::span<const ExampleRecord> records,
                        bool include_counterfactuals) {
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no records to count");
  }
  std::array<std::int64_t, 4> tally{};
  for (const ExampleRecord& r : records) {
    if (!include_counterfactuals && !r.natural()) continue;
    ++tally[Index(r.split())];
  }
  SplitCounts counts(tally[0], tally[1], tally[2], tally[3]);
  if (counts.total() == 0) {
    throw Error(ErrorCode::kEmptyDataset, "no natural records to count");
  }
  return counts;
}

DistributionStats ComputeStats(const SplitCounts& counts) {
  const Rational total = counts.total();
  if (total <= 0) {
    throw Error(ErrorCode::kEmptyDataset, "split counts sum to zero");
  }
  const Rational both = counts[Split::kBoth];
  const Rational with_main = both + counts[Split::kJustMain];
  const Rational with_spurious = both + counts[Split::kJustSpurious];

  DistributionStats stats;
  stats.p_main = ToDouble(with_main / total);
  stats.p_spurious = ToDouble(with_spurious / total);
  if (with_main > 0) {
    stats.p_spurious_given_main = ToDouble(both / with_main);
  }
  if (with_spurious > 0) {
    stats.p = ToDouble(both / with_spurious);
  }
  if (with_spurious > 0 && with_main > 0) {
    const Rational p_s = with_spurious / total;
    const Rational p_s_given_m = both / with_main;
    stats.bias = ToDouble((p_s_given_m - p_s) / p_s);
  }
  return stats;
}

Rational IndependenceDefect(const SplitCounts& counts) {
  const Rational with_spurious = counts[Split::kBoth] + counts[Split::kJustSpurious];
  const Rational without_spurious = counts[Split::kJustMain] + counts[Split::kNeither];
  if (with_spurious <= 0 || without_spurious <= 0) {
    throw Error(ErrorCode::kDegenerateSplit,
                "P(Main|Spurious) or P(Main|not Spurious) is undefined");
  }
  return counts[Split::kBoth] / with_spurious -
         counts[Split::kJustMain] / without_spurious;
}

BalancedWeights::BalancedWeights(double p_main) : p_main_(p_main) {
  if (!(p_main > 0.0 && p_main < 1.0)) {
    throw Error(ErrorCode::kDegenerateDistribution,
                "balanced weights need 0 < P(Main) < 1, got " +
                    std::to_string(p_main));
  }
  const double with_main = 0.5 * p_main;
  const double without_main = 0.5 * (1.0 - p_main);
  weights_ = {with_main, with_main, without_main, without_main};
}

BalancedWeights BalancedWeights::FromStats(const DistributionStats& stats) {
  return BalancedWeights(stats.p_main);
}

}  // namespace spirekit
