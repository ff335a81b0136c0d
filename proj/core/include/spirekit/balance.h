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

#ifndef SPIREKIT_BALANCE_H_
#define SPIREKIT_BALANCE_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spirekit/dataset.h"
#include "spirekit/rational.h"

namespace spirekit {

// Counterfactual copies to create: `expected_count` examples drawn from
// `source` and moved into `target` by `transform`. Originals are kept.
struct PlanEntry {
  Split source = Split::kBoth;
  Split target = Split::kJustMain;
  Transform transform = Transform::kRemoveSpurious;
  Rational expected_count;

  bool operator==(const PlanEntry&) const = default;
};

enum class PlanMode { kExpectation, kSampled };

std::string_view PlanModeName(PlanMode mode);
std::optional<PlanMode> ParsePlanMode(std::string_view name);

struct DeltaSolution {
  enum class Branch { kRemoval, kAddition };

  Rational delta;
  Branch branch = Branch::kRemoval;
  // Defect of the defining balance equation at `delta`, relative to the
  // magnitude of its terms.
  double residual = 0.0;
  // False when the root is irrational and `delta` is a rational
  // approximation of it.
  bool exact = true;
};

std::string_view DeltaBranchName(DeltaSolution::Branch branch);

struct AugmentationPlan {
  PlanMode mode = PlanMode::kExpectation;
  std::uint64_t seed = 0;
  // "setting1", "setting2", "setting3", "qcec"; informational.
  std::string strategy;
  std::optional<DeltaSolution> delta;
  std::vector<PlanEntry> entries;

  bool empty() const { return entries.empty(); }
};

// Setting 1: class-balanced data, counterfactuals may change the label.
// Throws WrongSetting unless P(Main) = P(Spurious) = 0.5 (within 1e-9).
AugmentationPlan PlanSetting1(const SplitCounts& counts);

// Setting 2: class-imbalanced data. One delta per branch; see the solvers.
// Throws DegenerateSplit if any split is empty, NoFeasibleDelta if the
// selected branch has no non-negative solution.
AugmentationPlan PlanSetting2(const SplitCounts& counts);

// Smallest delta >= 0 with
//   |Both| / (|Both| + |JS| + delta) = (|JM| + delta) / (|JM| + |N| + delta),
// i.e. the non-negative root of delta^2 + delta (JM + JS) + JM JS - Both N.
DeltaSolution SolveDeltaRemoval(const SplitCounts& counts);

// delta >= 0 with
//   (|Both| + delta) / (|Both| + |JS| + 2 delta) = |JM| / (|JM| + |N|),
// i.e. delta = (JM JS - Both N) / (N - JM).
DeltaSolution SolveDeltaAddition(const SplitCounts& counts);

// Setting 3: counterfactuals cannot change the label. Every example gets
// its Spurious status flipped.
AugmentationPlan PlanSetting3(const SplitCounts& counts);

// Distribution-agnostic comparison: every example has one applicable object
// removed, chosen uniformly at random (expected masses).
AugmentationPlan PlanQcec(const SplitCounts& counts);

// Multiplies every expected count by `factor` in (0, 1].
AugmentationPlan ScalePlan(const AugmentationPlan& plan, const Rational& factor);

// Throws PoolExhausted if an entry asks for more examples than its source
// split holds, InvalidTransform if an entry's transform does not move its
// source to its target.
void ValidatePlan(const AugmentationPlan& plan, const SplitCounts& counts);

// Split counts after adding the plan's expected counterfactuals.
SplitCounts ExpectedCounts(const SplitCounts& counts,
                           const AugmentationPlan& plan);

struct ArtifactExposureEntry {
  Rational with_main;
  Rational without_main;
  double p_main = 0.0;  // P(Main | artifact)
};

// P(Main | artifact) over the counterfactuals a plan creates, per artifact
// kind. Kinds the plan never produces are absent.
using ArtifactExposure = std::map<ArtifactKind, ArtifactExposureEntry>;

ArtifactExposure ComputeArtifactExposure(
    const AugmentationPlan& plan, const SplitCounts& counts,
    ArtifactKind removal_artifact = ArtifactKind::kGreyBoxRemoval);

using CounterfactFn =
    std::function<ExampleRecord(const ExampleRecord&, Transform)>;

// Counterfact for manifests without payloads: labels and provenance only.
CounterfactFn AbstractCounterfact(
    ArtifactKind removal_artifact = ArtifactKind::kGreyBoxRemoval);

// Integer realization of the plan's masses by largest-remainder rounding.
// The total is round-half-up of the summed masses; ties go to the earlier
// entry.
std::vector<std::int64_t> RealizeCounts(const AugmentationPlan& plan);

// Materializes a plan over natural records. Output: every input record
// unchanged and in input order, then the created counterfactuals ordered by
// id. In expectation mode the first sources by id are used; in sampled mode
// sources are drawn without replacement from a generator seeded by `seed`.
std::vector<ExampleRecord> ApplyPlan(const AugmentationPlan& plan,
                                     std::span<const ExampleRecord> records,
                                     const CounterfactFn& counterfact,
                                     std::uint64_t seed);

struct AugmentationUnion {
  std::vector<ExampleRecord> records;
  // Natural source ids used by more than one of the merged augmentations.
  std::vector<std::string> contended_sources;
};

// Unions the counterfactuals of several augmentations of one base manifest
// (e.g. one per Spurious feature sharing a Main) and reports source images
// that more than one augmentation edited.
AugmentationUnion UnionAugmentations(
    std::span<const ExampleRecord> base,
    std::span<const std::vector<ExampleRecord>> augmented);

}  // namespace spirekit

#endif  // SPIREKIT_BALANCE_H_
