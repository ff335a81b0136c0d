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

#include "spirekit/balance.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "spirekit/error.h"

namespace spirekit {

namespace {

const Rational kHalf(1, 2);

void AddEntry(AugmentationPlan& plan, Split source, Transform transform,
              const Rational& mass) {
  if (mass <= 0) return;
  const auto target = ApplyTransform(source, transform);
  plan.entries.push_back({source, *target, transform, mass});
}

bool IsClassBalanced(const SplitCounts& c) {
  const Rational total = c.total();
  if (total <= 0) return false;
  const Rational p_main = (c[Split::kBoth] + c[Split::kJustMain]) / total;
  const Rational p_spurious = (c[Split::kBoth] + c[Split::kJustSpurious]) / total;
  const Rational tol(1, 1'000'000'000);
  return abs(p_main - kHalf) <= tol && abs(p_spurious - kHalf) <= tol;
}

void RequireNonEmptySplits(const SplitCounts& c) {
  for (Split s : kAllSplits) {
    if (c[s] <= 0) {
      throw Error(ErrorCode::kDegenerateSplit,
                  "split " + std::string(SplitName(s)) + " is empty");
    }
  }
}

std::string Describe(const SplitCounts& c) {
  return "{" + ToString(c[Split::kBoth]) + ", " + ToString(c[Split::kJustMain]) +
         ", " + ToString(c[Split::kJustSpurious]) + ", " +
         ToString(c[Split::kNeither]) + "}";
}

// Value of delta^2 + b delta + c relative to the largest term.
double QuadraticResidual(long double delta, long double b, long double c) {
  const long double value = delta * delta + b * delta + c;
  const long double scale =
      std::max({delta * delta, std::fabs(b * delta), std::fabs(c), 1.0L});
  return static_cast<double>(value / scale);
}

}  // namespace

std::string_view PlanModeName(PlanMode mode) {
  return mode == PlanMode::kExpectation ? "expectation" : "sampled";
}

std::optional<PlanMode> ParsePlanMode(std::string_view name) {
  if (name == "expectation") return PlanMode::kExpectation;
  if (name == "sampled") return PlanMode::kSampled;
  return std::nullopt;
}

std::string_view DeltaBranchName(DeltaSolution::Branch branch) {
  return branch == DeltaSolution::Branch::kRemoval ? "removal" : "addition";
}

AugmentationPlan PlanSetting1(const SplitCounts& counts) {
  if (!IsClassBalanced(counts)) {
    throw Error(ErrorCode::kWrongSetting,
                "Setting 1 requires P(Main) = P(Spurious) = 0.5; counts " +
                    Describe(counts) + " are class-imbalanced (use Setting 2)");
  }
  AugmentationPlan plan;
  plan.strategy = "setting1";
  const Rational both = counts[Split::kBoth];
  const Rational with_spurious = both + counts[Split::kJustSpurious];
  const Rational p = both / with_spurious;
  if (p > kHalf) {
    const Rational move = (2 * p - 1) / (2 * p);
    AddEntry(plan, Split::kBoth, Transform::kRemoveSpurious, move * both);
    AddEntry(plan, Split::kBoth, Transform::kRemoveMain, move * both);
    AddEntry(plan, Split::kNeither, Transform::kAddMain, move * counts[Split::kNeither]);
    AddEntry(plan, Split::kNeither, Transform::kAddSpurious, move * counts[Split::kNeither]);
  } else if (p < kHalf) {
    const Rational move = (p - kHalf) / (p - 1);
    const Rational jm = counts[Split::kJustMain];
    const Rational js = counts[Split::kJustSpurious];
    AddEntry(plan, Split::kJustMain, Transform::kAddSpurious, move * jm);
    AddEntry(plan, Split::kJustMain, Transform::kRemoveMain, move * jm);
    AddEntry(plan, Split::kJustSpurious, Transform::kAddMain, move * js);
    AddEntry(plan, Split::kJustSpurious, Transform::kRemoveSpurious, move * js);
  }
  return plan;
}

DeltaSolution SolveDeltaRemoval(const SplitCounts& counts) {
  const Rational& both = counts[Split::kBoth];
  const Rational& jm = counts[Split::kJustMain];
  const Rational& js = counts[Split::kJustSpurious];
  const Rational& neither = counts[Split::kNeither];
  if (both + js <= 0 || jm + neither <= 0) {
    throw Error(ErrorCode::kDegenerateSplit,
                "removal equation has a zero denominator for " + Describe(counts));
  }
  const Rational b = jm + js;
  const Rational c = jm * js - both * neither;
  const Rational disc = b * b - 4 * c;
  if (disc < 0 || c > 0) {
    throw Error(ErrorCode::kNoFeasibleDelta,
                "removal equation has no non-negative root for " + Describe(counts));
  }

  DeltaSolution sol;
  sol.branch = DeltaSolution::Branch::kRemoval;
  if (c == 0) {
    sol.delta = 0;
    return sol;
  }
  // With b >= 0 the smaller root is <= 0, so the answer is the larger one,
  // written as -2c / (b + sqrt(disc)) to avoid cancellation.
  if (const auto root = ExactSqrt(disc)) {
    sol.delta = (-2 * c) / (b + *root);
    sol.exact = true;
  } else {
    const long double bl = ToLongDouble(b);
    const long double cl = ToLongDouble(c);
    const long double closed = (-2.0L * cl) / (bl + std::sqrt(ToLongDouble(disc)));

    // Bracketed bisection on the quadratic: f(0) = c < 0, f(sqrt|c|) >= 0.
    long double lo = 0.0L;
    long double hi = std::sqrt(-cl);
    for (int i = 0; i < 200 && hi - lo > 1e-18L * std::max(1.0L, hi); ++i) {
      const long double mid = 0.5L * (lo + hi);
      if (mid * mid + bl * mid + cl < 0) lo = mid; else hi = mid;
    }
    const long double bisected = 0.5L * (lo + hi);
    if (std::fabs(bisected - closed) > 1e-12L * std::max(1.0L, closed)) {
      throw Error(ErrorCode::kNoFeasibleDelta,
                  "closed-form and bisection roots disagree for " + Describe(counts));
    }
    sol.delta = ApproximateRational(closed);
    sol.exact = false;
  }
  const long double d = ToLongDouble(sol.delta);
  sol.residual = QuadraticResidual(d, ToLongDouble(b), ToLongDouble(c));
  return sol;
}

DeltaSolution SolveDeltaAddition(const SplitCounts& counts) {
  const Rational& both = counts[Split::kBoth];
  const Rational& jm = counts[Split::kJustMain];
  const Rational& js = counts[Split::kJustSpurious];
  const Rational& neither = counts[Split::kNeither];
  if (jm + neither <= 0) {
    throw Error(ErrorCode::kDegenerateSplit,
                "addition equation has a zero denominator for " + Describe(counts));
  }
  const Rational numerator = jm * js - both * neither;
  const Rational slope = neither - jm;
  DeltaSolution sol;
  sol.branch = DeltaSolution::Branch::kAddition;
  if (slope == 0) {
    if (numerator != 0) {
      throw Error(ErrorCode::kNoFeasibleDelta,
                  "|Neither| = |JustMain| and the addition equation is "
                  "inconsistent for " + Describe(counts));
    }
    sol.delta = 0;
    return sol;
  }
  const Rational delta = numerator / slope;
  if (delta < 0) {
    throw Error(ErrorCode::kNoFeasibleDelta,
                "addition delta = " + ToString(delta) + " < 0 for " +
                    Describe(counts));
  }
  if (both + js + 2 * delta <= 0) {
    throw Error(ErrorCode::kDegenerateSplit,
                "addition equation has a zero denominator for " + Describe(counts));
  }
  sol.delta = delta;
  // Exact arithmetic; the residual is zero by construction but is still
  // evaluated so callers see the same field for both branches.
  const Rational lhs = (both + delta) / (both + js + 2 * delta);
  const Rational rhs = jm / (jm + neither);
  sol.residual = ToDouble(lhs - rhs);
  return sol;
}

AugmentationPlan PlanSetting2(const SplitCounts& counts) {
  RequireNonEmptySplits(counts);
  AugmentationPlan plan;
  plan.strategy = "setting2";
  const Rational total = counts.total();
  const Rational both = counts[Split::kBoth];
  const Rational p_s = (both + counts[Split::kJustSpurious]) / total;
  const Rational p_s_given_m = both / (both + counts[Split::kJustMain]);
  if (p_s_given_m == p_s) {
    plan.delta = DeltaSolution{Rational(0), DeltaSolution::Branch::kRemoval, 0.0, true};
    return plan;
  }
  if (p_s_given_m > p_s) {
    plan.delta = SolveDeltaRemoval(counts);
    AddEntry(plan, Split::kBoth, Transform::kRemoveSpurious, plan.delta->delta);
    AddEntry(plan, Split::kBoth, Transform::kRemoveMain, plan.delta->delta);
  } else {
    plan.delta = SolveDeltaAddition(counts);
    AddEntry(plan, Split::kJustMain, Transform::kAddSpurious, plan.delta->delta);
    AddEntry(plan, Split::kNeither, Transform::kAddSpurious, plan.delta->delta);
  }
  return plan;
}

AugmentationPlan PlanSetting3(const SplitCounts& counts) {
  AugmentationPlan plan;
  plan.strategy = "setting3";
  AddEntry(plan, Split::kBoth, Transform::kRemoveSpurious, counts[Split::kBoth]);
  AddEntry(plan, Split::kJustSpurious, Transform::kRemoveSpurious,
           counts[Split::kJustSpurious]);
  AddEntry(plan, Split::kJustMain, Transform::kAddSpurious, counts[Split::kJustMain]);
  AddEntry(plan, Split::kNeither, Transform::kAddSpurious, counts[Split::kNeither]);
  return plan;
}

AugmentationPlan PlanQcec(const SplitCounts& counts) {
  AugmentationPlan plan;
  plan.strategy = "qcec";
  // Both has two removable objects; JustMain and JustSpurious have one;
  // Neither has none.
  AddEntry(plan, Split::kBoth, Transform::kRemoveSpurious, kHalf * counts[Split::kBoth]);
  AddEntry(plan, Split::kBoth, Transform::kRemoveMain, kHalf * counts[Split::kBoth]);
  AddEntry(plan, Split::kJustMain, Transform::kRemoveMain, counts[Split::kJustMain]);
  AddEntry(plan, Split::kJustSpurious, Transform::kRemoveSpurious,
           counts[Split::kJustSpurious]);
  return plan;
}

AugmentationPlan ScalePlan(const AugmentationPlan& plan, const Rational& factor) {
  if (factor <= 0 || factor > 1) {
    throw Error(ErrorCode::kInvalidFactor,
                "scale factor must lie in (0, 1], got " + ToString(factor));
  }
  AugmentationPlan scaled = plan;
  for (PlanEntry& e : scaled.entries) e.expected_count *= factor;
  return scaled;
}

void ValidatePlan(const AugmentationPlan& plan, const SplitCounts& counts) {
  for (const PlanEntry& e : plan.entries) {
    if (ApplyTransform(e.source, e.transform) != e.target) {
      throw Error(ErrorCode::kInvalidTransform,
                  std::string(TransformName(e.transform)) + " does not move " +
                      std::string(SplitName(e.source)) + " to " +
                      std::string(SplitName(e.target)));
    }
    if (e.expected_count < 0) {
      throw Error(ErrorCode::kInvalidArgument, "negative expected count");
    }
    if (e.expected_count > counts[e.source]) {
      throw Error(ErrorCode::kPoolExhausted,
                  "entry " + std::string(SplitName(e.source)) + " -> " +
                      std::string(SplitName(e.target)) + " needs " +
                      ToString(e.expected_count) + " sources but the pool has " +
                      ToString(counts[e.source]));
    }
  }
}

SplitCounts ExpectedCounts(const SplitCounts& counts,
                           const AugmentationPlan& plan) {
  SplitCounts out = counts;
  for (const PlanEntry& e : plan.entries) out[e.target] += e.expected_count;
  return out;
}

ArtifactExposure ComputeArtifactExposure(const AugmentationPlan& plan,
                                         const SplitCounts& counts,
                                         ArtifactKind removal_artifact) {
  ValidatePlan(plan, counts);
  ArtifactExposure exposure;
  for (const PlanEntry& e : plan.entries) {
    if (e.expected_count == 0) continue;
    const ArtifactKind kind =
        IsRemoval(e.transform) ? removal_artifact : ArtifactKind::kPasteAddition;
    ArtifactExposureEntry& entry = exposure[kind];
    if (HasMain(e.target)) {
      entry.with_main += e.expected_count;
    } else {
      entry.without_main += e.expected_count;
    }
  }
  for (auto& [kind, entry] : exposure) {
    entry.p_main = ToDouble(entry.with_main / (entry.with_main + entry.without_main));
  }
  return exposure;
}

CounterfactFn AbstractCounterfact(ArtifactKind removal_artifact) {
  return [removal_artifact](const ExampleRecord& r, Transform t) {
    return MakeCounterfactual(r, t, removal_artifact);
  };
}

std::vector<std::int64_t> RealizeCounts(const AugmentationPlan& plan) {
  const std::size_t n = plan.entries.size();
  std::vector<std::int64_t> realized(n);
  std::vector<Rational> remainder(n);
  Rational total_mass = 0;
  std::int64_t floor_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Rational& m = plan.entries[i].expected_count;
    const Rational f = Floor(m);
    realized[i] = static_cast<std::int64_t>(numerator(f));
    remainder[i] = m - f;
    total_mass += m;
    floor_sum += realized[i];
  }
  const auto target = static_cast<std::int64_t>(numerator(Floor(total_mass + kHalf)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::int64_t k = 0; k < target - floor_sum && k < static_cast<std::int64_t>(n); ++k) {
    ++realized[order[k]];
  }
  return realized;
}

std::vector<ExampleRecord> ApplyPlan(const AugmentationPlan& plan,
                                     std::span<const ExampleRecord> records,
                                     const CounterfactFn& counterfact,
                                     std::uint64_t seed) {
  std::vector<ExampleRecord> out(records.begin(), records.end());
  if (plan.empty()) return out;

  std::array<std::vector<const ExampleRecord*>, 4> pools;
  for (const ExampleRecord& r : records) {
    if (r.natural()) pools[Index(r.split())].push_back(&r);
  }
  for (auto& pool : pools) {
    std::stable_sort(pool.begin(), pool.end(),
                     [](const ExampleRecord* a, const ExampleRecord* b) {
                       return a->id < b->id;
                     });
  }
  const std::vector<std::int64_t> realized = RealizeCounts(plan);

  std::vector<ExampleRecord> created;
  for (std::size_t i = 0; i < plan.entries.size(); ++i) {
    const PlanEntry& e = plan.entries[i];
    if (ApplyTransform(e.source, e.transform) != e.target) {
      throw Error(ErrorCode::kInvalidTransform,
                  std::string(TransformName(e.transform)) + " does not move " +
                      std::string(SplitName(e.source)) + " to " +
                      std::string(SplitName(e.target)));
    }
    const auto& pool = pools[Index(e.source)];
    const auto k = static_cast<std::size_t>(realized[i]);
    if (k > pool.size()) {
      throw Error(ErrorCode::kPoolExhausted,
                  "entry " + std::string(SplitName(e.source)) + " -> " +
                      std::string(SplitName(e.target)) + " needs " +
                      std::to_string(k) + " natural sources, pool has " +
                      std::to_string(pool.size()));
    }
    std::vector<const ExampleRecord*> chosen;
    if (plan.mode == PlanMode::kExpectation) {
      chosen.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
      std::seed_seq seq{static_cast<std::uint32_t>(seed),
                        static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(i)};
      std::mt19937_64 rng(seq);
      chosen = pool;
      // Partial Fisher-Yates: the first k are a uniform sample.
      for (std::size_t j = 0; j < k; ++j) {
        std::uniform_int_distribution<std::size_t> pick(j, chosen.size() - 1);
        std::swap(chosen[j], chosen[pick(rng)]);
      }
      chosen.resize(k);
    }
    for (const ExampleRecord* src : chosen) {
      created.push_back(counterfact(*src, e.transform));
    }
  }

  std::set<std::string> used;
  for (const ExampleRecord& r : out) used.insert(r.id);
  std::stable_sort(created.begin(), created.end(),
                   [](const ExampleRecord& a, const ExampleRecord& b) {
                     return a.id < b.id;
                   });
  for (ExampleRecord& r : created) {
    if (used.contains(r.id)) {
      const std::string base = r.id;
      for (int n = 2;; ++n) {
        r.id = base + "#" + std::to_string(n);
        if (!used.contains(r.id)) break;
      }
    }
    used.insert(r.id);
    out.push_back(std::move(r));
  }
  return out;
}

AugmentationUnion UnionAugmentations(
    std::span<const ExampleRecord> base,
    std::span<const std::vector<ExampleRecord>> augmented) {
  AugmentationUnion result;
  result.records.assign(base.begin(), base.end());
  std::set<std::string> ids;
  for (const ExampleRecord& r : base) ids.insert(r.id);
  std::map<std::string, std::set<std::size_t>> users;
  for (std::size_t a = 0; a < augmented.size(); ++a) {
    for (const ExampleRecord& r : augmented[a]) {
      if (r.natural()) continue;
      if (r.source_id) users[*r.source_id].insert(a);
      ExampleRecord copy = r;
      if (ids.contains(copy.id)) {
        const std::string stem = copy.id;
        for (int n = 2;; ++n) {
          copy.id = stem + "#" + std::to_string(n);
          if (!ids.contains(copy.id)) break;
        }
      }
      ids.insert(copy.id);
      result.records.push_back(std::move(copy));
    }
  }
  for (const auto& [source, plans] : users) {
    if (plans.size() > 1) result.contended_sources.push_back(source);
  }
  return result;
}

}  // namespace spirekit
