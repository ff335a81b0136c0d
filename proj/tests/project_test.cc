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

#include "spirekit/project.h"

#include <gtest/gtest.h>

#include <random>

#include "spirekit/error.h"

namespace spirekit {
namespace {

Representation Rep(std::string id, std::vector<double> v, bool label) {
  return Representation{std::move(id), std::move(v), label};
}

std::vector<Representation> GaussianMixture(std::size_t n, std::size_t d, double shift,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::vector<Representation> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool label = coin(rng);
    std::vector<double> v(d);
    for (std::size_t j = 0; j < d; ++j) v[j] = g(rng) + (label && j == 0 ? shift : 0.0);
    out.push_back(Rep("r" + std::to_string(i), std::move(v), label));
  }
  return out;
}

// Naive reference loop: accumulate r += s * w (or -=) until the probe is
// confident about the other label.
struct LiteralResult {
  std::vector<double> values;
  std::int64_t steps = 0;
};

LiteralResult LiteralProjection(const Representation& r, const LinearProbe& probe, double c,
                                double s) {
  LiteralResult out{r.values, 0};
  auto conf = [&] { return probe.Confidence(out.values); };
  if (r.spurious_label) {
    while (conf() > c) {
      for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= s * probe.w[i];
      ++out.steps;
    }
  } else {
    while (conf() < 1.0 - c) {
      for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += s * probe.w[i];
      ++out.steps;
    }
  }
  return out;
}

TEST(Sigmoid, StableAtExtremes) {
  EXPECT_DOUBLE_EQ(Sigmoid(0.0), 0.5);
  EXPECT_EQ(Sigmoid(-1000.0), 0.0);
  EXPECT_EQ(Sigmoid(1000.0), 1.0);
  EXPECT_NEAR(Sigmoid(2.0) + Sigmoid(-2.0), 1.0, 1e-15);
}

TEST(FitProbe, SeparableOneDimensional) {
  std::vector<Representation> reps;
  for (int i = 0; i < 20; ++i) {
    reps.push_back(Rep("n" + std::to_string(i), {-1.0}, false));
    reps.push_back(Rep("p" + std::to_string(i), {1.0}, true));
  }
  ProbeFitOptions options;
  options.max_epochs = 2000;
  const ProbeFit fit = FitProbe(reps, options);
  EXPECT_GT(fit.probe.w[0], 0.0);
  for (const auto& r : reps) EXPECT_EQ(fit.probe.Predict(r.values), r.spurious_label);
  // Separable data has no finite optimum.
  EXPECT_FALSE(fit.converged);
  EXPECT_GT(fit.gradient_norm, 0.0);
}

TEST(FitProbe, IndependentLabelsGiveMajorityRate) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution label(0.7);
  std::vector<Representation> reps;
  std::size_t positives = 0;
  for (int i = 0; i < 5000; ++i) {
    const bool y = label(rng);
    positives += y;
    reps.push_back(Rep(std::to_string(i), {g(rng), g(rng), g(rng)}, y));
  }
  const ProbeFit fit = FitProbe(reps);
  EXPECT_TRUE(fit.converged);
  std::size_t right = 0;
  for (const auto& r : reps) right += fit.probe.Predict(r.values) == r.spurious_label;
  const double majority = static_cast<double>(positives) / 5000.0;
  EXPECT_NEAR(static_cast<double>(right) / 5000.0, majority, 0.03);
}

TEST(FitProbe, DeterministicUnderDuplication) {
  const auto reps = GaussianMixture(200, 3, 2.0, 1);
  auto doubled = reps;
  doubled.insert(doubled.end(), reps.begin(), reps.end());
  ProbeFitOptions options;
  options.max_epochs = 500;
  const ProbeFit a = FitProbe(reps, options);
  const ProbeFit b = FitProbe(reps, options);
  EXPECT_EQ(a.probe.w, b.probe.w);
  EXPECT_EQ(a.probe.b, b.probe.b);
  const ProbeFit c = FitProbe(doubled, options);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a.probe.w[i], c.probe.w[i], 1e-12);
}

TEST(FitProbe, Errors) {
  const std::vector<Representation> one_class = {Rep("a", {1.0}, true), Rep("b", {2.0}, true)};
  try {
    FitProbe(one_class);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateLabels);
  }
  const std::vector<Representation> ragged = {Rep("a", {1.0}, true), Rep("b", {2.0, 1.0}, false)};
  EXPECT_THROW(FitProbe(ragged), Error);
  const std::vector<Representation> nan = {Rep("a", {std::nan("")}, true), Rep("b", {2.0}, false)};
  EXPECT_THROW(FitProbe(nan), Error);
}

TEST(Project, OneDimensionalWorkedExample) {
  const LinearProbe probe{{1.0}, 0.0};
  ProjectionParams params;
  params.confidence = 1e-4;
  params.step = 0.1;
  const Projection p = ProjectRepresentation(Rep("r", {0.0}, false), probe, params);
  EXPECT_EQ(p.steps, 93);
  EXPECT_NEAR(p.values[0], 9.3, 1e-12);
  // Exactly 93 * 0.1 * w, not an accumulated sum.
  EXPECT_EQ(p.values[0], 0.0 + 93.0 * 0.1 * 1.0);
  EXPECT_TRUE(p.label);
  EXPECT_GE(probe.Confidence(p.values), 1.0 - 1e-4);
  const Projection short_of = ProjectRepresentation(Rep("r", {0.0}, false), probe,
                                                    {1e-4, 0.1, 1'000'000});
  EXPECT_EQ(short_of.steps, 93);
}

TEST(Project, AlreadyConfidentNeedsNoSteps) {
  const LinearProbe probe{{1.0}, 0.0};
  const Projection p = ProjectRepresentation(Rep("r", {-20.0}, true), probe);
  EXPECT_EQ(p.steps, 0);
  EXPECT_EQ(p.values, (std::vector<double>{-20.0}));
  EXPECT_FALSE(p.label);
}

TEST(Project, ZeroProbeNeverTerminates) {
  const LinearProbe probe{{0.0, 0.0}, 0.0};
  ProjectionParams params;
  params.max_iters = 1000;
  try {
    ProjectRepresentation(Rep("stuck", {1.0, 2.0}, true), probe, params);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonTerminating);
    EXPECT_NE(std::string(e.what()).find("stuck"), std::string::npos);
  }
}

TEST(Project, ParamValidation) {
  const LinearProbe probe{{1.0}, 0.0};
  for (const ProjectionParams& bad :
       {ProjectionParams{0.0, 0.1, 10}, ProjectionParams{0.5, 0.1, 10},
        ProjectionParams{1e-4, 0.0, 10}, ProjectionParams{1e-4, 0.1, -1}}) {
    EXPECT_THROW(ProjectRepresentation(Rep("r", {0.0}, false), probe, bad), Error);
  }
}

TEST(Project, DatasetFlipsEveryLabelAndMatchesLiteralLoop) {
  const auto reps = GaussianMixture(400, 6, 3.0, 7);
  ProbeFitOptions options;
  options.max_epochs = 3000;
  const LinearProbe probe = FitProbe(reps, options).probe;
  const auto projected = ProjectDataset(reps, probe);
  ASSERT_EQ(projected.size(), reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const Projection& p = projected[i];
    EXPECT_EQ(p.id, reps[i].id);
    EXPECT_EQ(p.label, !reps[i].spurious_label);
    EXPECT_EQ(probe.Predict(p.values), p.label);
    const double conf = probe.Confidence(p.values);
    if (p.label) EXPECT_GE(conf, 1.0 - 1e-4); else EXPECT_LE(conf, 1e-4);

    const LiteralResult literal = LiteralProjection(reps[i], probe, 1e-4, 0.1);
    EXPECT_LE(std::llabs(literal.steps - p.steps), 1) << p.id;
    if (literal.steps == p.steps) {
      for (std::size_t j = 0; j < p.values.size(); ++j) {
        EXPECT_NEAR(p.values[j], literal.values[j], 1e-9 * (1.0 + std::fabs(literal.values[j])));
      }
    }
  }
}

TEST(Project, EmptyDataset) {
  EXPECT_TRUE(ProjectDataset({}, LinearProbe{{1.0}, 0.0}).empty());
}

TEST(Project, ErrorsCarryTheRecordId) {
  const LinearProbe probe{{1.0}, 0.0};
  const std::vector<Representation> reps = {Rep("fine", {0.0}, false), Rep("wrong-d", {0.0, 1.0}, false)};
  try {
    ProjectDataset(reps, probe);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("wrong-d"), std::string::npos);
  }
}

}  // namespace
}  // namespace spirekit
