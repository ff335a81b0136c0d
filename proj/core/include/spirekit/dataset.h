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

#ifndef SPIREKIT_DATASET_H_
#define SPIREKIT_DATASET_H_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spirekit/rational.h"

namespace spirekit {

// The 2x2 partition of a dataset by presence of Main (the label) and
// Spurious (the suspected feature).
enum class Split { kBoth = 0, kJustMain = 1, kJustSpurious = 2, kNeither = 3 };

inline constexpr std::array<Split, 4> kAllSplits = {
    Split::kBoth, Split::kJustMain, Split::kJustSpurious, Split::kNeither};

constexpr std::size_t Index(Split s) { return static_cast<std::size_t>(s); }

constexpr Split AssignSplit(bool main, bool spurious) {
  if (main) return spurious ? Split::kBoth : Split::kJustMain;
  return spurious ? Split::kJustSpurious : Split::kNeither;
}

constexpr bool HasMain(Split s) {
  return s == Split::kBoth || s == Split::kJustMain;
}
constexpr bool HasSpurious(Split s) {
  return s == Split::kBoth || s == Split::kJustSpurious;
}

std::string_view SplitName(Split s);
std::optional<Split> ParseSplit(std::string_view name);

// Counterfactual edits. Each toggles exactly one of the two objects.
enum class Transform { kRemoveSpurious, kRemoveMain, kAddSpurious, kAddMain };

inline constexpr std::array<Transform, 4> kAllTransforms = {
    Transform::kRemoveSpurious, Transform::kRemoveMain, Transform::kAddSpurious,
    Transform::kAddMain};

std::string_view TransformName(Transform t);
std::optional<Transform> ParseTransform(std::string_view name);

constexpr bool IsRemoval(Transform t) {
  return t == Transform::kRemoveSpurious || t == Transform::kRemoveMain;
}

// Destination split of `t` applied to an example in `source`, or nullopt
// when the transform is not applicable (removing an absent object or adding
// a present one).
std::optional<Split> ApplyTransform(Split source, Transform t);

// The unique transform moving `source` to `target`, if they differ by one
// object.
std::optional<Transform> TransformBetween(Split source, Split target);

enum class Provenance { kNatural, kCounterfactual };

enum class ArtifactKind { kNone, kGreyBoxRemoval, kInpaintRemoval, kPasteAddition };

inline constexpr std::array<ArtifactKind, 3> kCounterfactualArtifacts = {
    ArtifactKind::kGreyBoxRemoval, ArtifactKind::kInpaintRemoval,
    ArtifactKind::kPasteAddition};

std::string_view ArtifactName(ArtifactKind kind);
std::optional<ArtifactKind> ParseArtifact(std::string_view name);

struct ExampleRecord {
  std::string id;
  bool main = false;
  bool spurious = false;
  Provenance provenance = Provenance::kNatural;
  ArtifactKind artifact = ArtifactKind::kNone;
  std::optional<std::string> source_id;
  // Feature vector; only the simulator populates it.
  std::vector<double> payload;

  Split split() const { return AssignSplit(main, spurious); }
  bool natural() const { return provenance == Provenance::kNatural; }
};

// Throws InvalidArgument unless
// natural <=> artifact == none <=> source_id absent.
void ValidateRecord(const ExampleRecord& record);

// Builds the label/provenance part of a counterfactual of `source`. The
// payload is copied unchanged; callers that carry features edit it after.
// Throws InvalidTransform when `t` does not apply to the source's split.
ExampleRecord MakeCounterfactual(const ExampleRecord& source, Transform t,
                                 ArtifactKind removal_artifact =
                                     ArtifactKind::kGreyBoxRemoval);

// Per-split tally. Entries are exact rationals so that fractional expected
// plan masses compose without rounding.
class SplitCounts {
 public:
  SplitCounts() = default;
  SplitCounts(Rational both, Rational just_main, Rational just_spurious,
              Rational neither);

  const Rational& operator[](Split s) const { return counts_[Index(s)]; }
  Rational& operator[](Split s) { return counts_[Index(s)]; }

  Rational total() const;
  bool operator==(const SplitCounts&) const = default;

 private:
  std::array<Rational, 4> counts_{};
};

// Throws EmptyDataset on empty input (or when the filter leaves nothing).
SplitCounts CountSplits(std::span<const ExampleRecord> records,
                        bool include_counterfactuals);

struct DistributionStats {
  double p_main = 0.0;
  double p_spurious = 0.0;
  // Undefined when P(Main) = 0.
  std::optional<double> p_spurious_given_main;
  // p = P(Main | Spurious); undefined when P(Spurious) = 0.
  std::optional<double> p;
  // (P(S|M) - P(S)) / P(S); undefined when P(S) = 0 or P(M) = 0.
  std::optional<double> bias;
};

// Throws EmptyDataset when the total is zero.
DistributionStats ComputeStats(const SplitCounts& counts);

// P(Main|Spurious) - P(Main|not Spurious), computed exactly. Zero iff Main
// and Spurious are independent under `counts`. Throws DegenerateSplit when
// either conditional is undefined.
Rational IndependenceDefect(const SplitCounts& counts);

// Split masses of the balanced distribution: P(Main) preserved and
// P(Spurious|Main) = P(Spurious|not Main) = 0.5.
class BalancedWeights {
 public:
  explicit BalancedWeights(double p_main);
  static BalancedWeights FromStats(const DistributionStats& stats);
  static BalancedWeights Uniform() { return BalancedWeights(0.5); }

  double operator[](Split s) const { return weights_[Index(s)]; }
  double p_main() const { return p_main_; }

 private:
  double p_main_;
  std::array<double, 4> weights_;
};

}  // namespace spirekit

#endif  // SPIREKIT_DATASET_H_
