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

#ifndef SPIREKIT_IDENTIFY_H_
#define SPIREKIT_IDENTIFY_H_

#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "spirekit/dataset.h"

namespace spirekit {

// Scores are binarized at this threshold before prediction changes are
// counted.
inline constexpr double kDefaultDecisionThreshold = 0.5;

constexpr bool Binarize(double score,
                        double threshold = kDefaultDecisionThreshold) {
  return score >= threshold;
}

// One model evaluation on a natural example and on its counterfactual.
struct FlipPair {
  std::string example_id;
  bool prediction_original = false;
  bool prediction_counterfactual = false;
  Transform transform = Transform::kRemoveSpurious;
  Split source_split = Split::kBoth;

  bool flipped() const {
    return prediction_original != prediction_counterfactual;
  }
};

// Fraction of pairs whose binarized prediction changed. All pairs must share
// one (transform, source split) and the transform must apply to that split.
double FlipRate(std::span<const FlipPair> pairs);

struct PatternKey {
  std::string main;
  std::string spurious;

  auto operator<=>(const PatternKey&) const = default;
};

struct PatternScore {
  PatternKey pair;
  double flip_rate = 0.0;
  std::int64_t n_both_train = 0;
  std::optional<double> bias;
};

inline constexpr std::int64_t kDefaultMinBoth = 25;
inline constexpr double kDefaultMinFlip = 0.40;

// Keeps scores with n_both_train >= min_both and flip_rate >= min_flip,
// ordered by descending flip rate then (main, spurious).
std::vector<PatternScore> FilterCandidates(std::span<const PatternScore> scores,
                                           std::int64_t min_both = kDefaultMinBoth,
                                           double min_flip = kDefaultMinFlip);

enum class TriageLabel { kUnreviewed, kSpurious, kValid };

std::string_view TriageLabelName(TriageLabel label);

// Human decisions on identified patterns. Persisted as tab-separated lines
// `<main>\t<spurious>\t<spurious|valid>\t<note>`; later lines for the same
// pair supersede earlier ones so the file can be appended to.
class TriageLedger {
 public:
  struct Entry {
    TriageLabel label = TriageLabel::kUnreviewed;
    std::string note;
  };

  void Set(const PatternKey& pair, TriageLabel label, std::string note = "");
  TriageLabel Get(const PatternKey& pair) const;
  const std::map<PatternKey, Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  static TriageLedger Read(std::istream& in);
  void Write(std::ostream& out) const;
  static std::string FormatLine(const PatternKey& pair, TriageLabel label,
                                const std::string& note);

 private:
  std::map<PatternKey, Entry> entries_;
};

struct TriageResult {
  std::vector<PatternScore> spurious;
  std::vector<PatternKey> unreviewed;
};

// Returns the candidates labeled spurious, in candidate order. Pairs that
// were never reviewed are listed separately and are not treated as valid.
// Throws UnknownPair when the ledger labels a pair that is not a candidate.
TriageResult TriageApply(std::span<const PatternScore> candidates,
                         const TriageLedger& ledger);

struct PairStats {
  std::int64_t n_both_train = 0;
  std::optional<double> bias;
};

// Identification score for every pair present in `pairs_by_pattern`: the
// flip rate of remove_spurious on Both. Pairs with no such flips are
// skipped. When `stats` lacks a pair, n_both_train falls back to the number
// of Both examples that were evaluated.
std::vector<PatternScore> ScorePatterns(
    const std::map<PatternKey, std::vector<FlipPair>>& pairs_by_pattern,
    const std::map<PatternKey, PairStats>& stats);

}  // namespace spirekit

#endif  // SPIREKIT_IDENTIFY_H_
