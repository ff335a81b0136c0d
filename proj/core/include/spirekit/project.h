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

#ifndef SPIREKIT_PROJECT_H_
#define SPIREKIT_PROJECT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace spirekit {

double Sigmoid(double logit);

struct Representation {
  std::string id;
  std::vector<double> values;
  bool spurious_label = false;
};

// Linear model for "contains Spurious" over representation vectors.
struct LinearProbe {
  std::vector<double> w;
  double b = 0.0;

  double Logit(std::span<const double> r) const;
  double Confidence(std::span<const double> r) const { return Sigmoid(Logit(r)); }
  bool Predict(std::span<const double> r) const { return Logit(r) >= 0.0; }
};

struct ProbeFitOptions {
  double learning_rate = 0.5;
  int max_epochs = 20000;
  double gradient_tolerance = 1e-6;
};

struct ProbeFit {
  LinearProbe probe;
  bool converged = false;
  double gradient_norm = 0.0;
  int epochs = 0;
};

// Logistic regression by full-batch gradient descent on mean binary
// cross-entropy, starting from w = 0, b = 0, without regularization. Stops
// when the gradient norm is <= gradient_tolerance or after max_epochs
// (then converged = false). Throws DegenerateLabels unless both labels
// occur, InvalidArgument on ragged or non-finite input.
ProbeFit FitProbe(std::span<const Representation> reps,
                  const ProbeFitOptions& options = {});

struct ProjectionParams {
  double confidence = 1e-4;  // c, in (0, 0.5)
  double step = 0.1;         // s, > 0
  std::int64_t max_iters = 1'000'000;

  void Validate() const;
};

struct Projection {
  std::string id;
  std::vector<double> values;
  bool label = false;  // flipped Spurious label
  std::int64_t steps = 0;
};

// Moves r along the probe direction in steps of s * w until the probe is
// confident (past c or 1 - c) that Spurious has the opposite value. After k
// steps the representation is exactly r -/+ k * s * w, recomputed from r
// rather than accumulated. Throws NonTerminating past max_iters.
Projection ProjectRepresentation(const Representation& r, const LinearProbe& probe,
                                 const ProjectionParams& params = {});

// Element-wise; output order matches input. Errors carry the record id.
std::vector<Projection> ProjectDataset(std::span<const Representation> reps,
                                       const LinearProbe& probe,
                                       const ProjectionParams& params = {});

}  // namespace spirekit

#endif  // SPIREKIT_PROJECT_H_
