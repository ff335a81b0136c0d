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

#include <cmath>
#include <string>

#include "spirekit/error.h"

namespace spirekit {

double Sigmoid(double logit) {
  if (logit >= 0) return 1.0 / (1.0 + std::exp(-logit));
  const double e = std::exp(logit);
  return e / (1.0 + e);
}

double LinearProbe::Logit(std::span<const double> r) const {
  if (r.size() != w.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "representation has dimension " + std::to_string(r.size()) +
                    ", probe expects " + std::to_string(w.size()));
  }
  double z = b;
  for (std::size_t i = 0; i < w.size(); ++i) z += w[i] * r[i];
  return z;
}

ProbeFit FitProbe(std::span<const Representation> reps,
                  const ProbeFitOptions& options) {
  if (reps.size() < 2) {
    throw Error(ErrorCode::kDegenerateLabels, "need at least two representations");
  }
  const std::size_t d = reps.front().values.size();
  std::size_t positives = 0;
  for (const Representation& r : reps) {
    if (r.values.size() != d) {
      throw Error(ErrorCode::kInvalidArgument,
                  "representation '" + r.id + "' has inconsistent dimension");
    }
    for (double v : r.values) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "representation '" + r.id + "' has a non-finite entry");
      }
    }
    if (r.spurious_label) ++positives;
  }
  if (positives == 0 || positives == reps.size()) {
    throw Error(ErrorCode::kDegenerateLabels,
                "probe training needs both Spurious labels present");
  }

  ProbeFit fit;
  fit.probe.w.assign(d, 0.0);
  fit.probe.b = 0.0;
  const double inv_n = 1.0 / static_cast<double>(reps.size());
  std::vector<double> grad_w(d);
  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    double grad_b = 0.0;
    for (const Representation& r : reps) {
      const double err = fit.probe.Confidence(r.values) - (r.spurious_label ? 1.0 : 0.0);
      for (std::size_t i = 0; i < d; ++i) grad_w[i] += err * r.values[i];
      grad_b += err;
    }
    double norm2 = grad_b * grad_b * inv_n * inv_n;
    for (double g : grad_w) norm2 += g * g * inv_n * inv_n;
    fit.gradient_norm = std::sqrt(norm2);
    fit.epochs = epoch;
    if (fit.gradient_norm <= options.gradient_tolerance) {
      fit.converged = true;
      return fit;
    }
    for (std::size_t i = 0; i < d; ++i) {
      fit.probe.w[i] -= options.learning_rate * grad_w[i] * inv_n;
    }
    fit.probe.b -= options.learning_rate * grad_b * inv_n;
  }
  fit.epochs = options.max_epochs;
  return fit;
}

void ProjectionParams::Validate() const {
  if (!(confidence > 0.0 && confidence < 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "confidence threshold must be in (0, 0.5)");
  }
  if (!(step > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "step size must be positive");
  }
  if (max_iters < 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_iters must be non-negative");
  }
}

Projection ProjectRepresentation(const Representation& r, const LinearProbe& probe,
                                 const ProjectionParams& params) {
  params.Validate();
  const double base_logit = probe.Logit(r.values);
  double w_norm2 = 0.0;
  for (double wi : probe.w) w_norm2 += wi * wi;

  // Removing Spurious walks against w while the probe still says "present";
  // adding walks along w while it does not yet say so confidently.
  const bool remove = r.spurious_label;
  const double direction = remove ? -1.0 : 1.0;
  auto keep_going = [&](std::int64_t k) {
    const double logit = base_logit + direction * static_cast<double>(k) *
                                          params.step * w_norm2;
    const double conf = Sigmoid(logit);
    return remove ? conf > params.confidence : conf < 1.0 - params.confidence;
  };

  auto position = [&](std::int64_t k) {
    std::vector<double> v = r.values;
    const double scale = direction * static_cast<double>(k) * params.step;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += scale * probe.w[i];
    return v;
  };
  auto literal_keep_going = [&](const std::vector<double>& v) {
    const double conf = probe.Confidence(v);
    return remove ? conf > params.confidence : conf < 1.0 - params.confidence;
  };
  auto check_budget = [&](std::int64_t k) {
    if (k >= params.max_iters) {
      throw Error(ErrorCode::kNonTerminating,
                  "projection of '" + r.id + "' did not cross the confidence "
                  "threshold within " + std::to_string(params.max_iters) + " steps");
    }
  };

  std::int64_t k = 0;
  while (keep_going(k)) {
    check_budget(k);
    ++k;
  }
  // The loop above tracks the logit in closed form; confirm on the actual
  // vector so rounding can never leave the probe short of the threshold.
  std::vector<double> values = position(k);
  while (literal_keep_going(values)) {
    check_budget(k);
    ++k;
    values = position(k);
  }

  Projection out;
  out.id = r.id;
  out.label = !r.spurious_label;
  out.steps = k;
  out.values = std::move(values);
  return out;
}

std::vector<Projection> ProjectDataset(std::span<const Representation> reps,
                                       const LinearProbe& probe,
                                       const ProjectionParams& params) {
  std::vector<Projection> out;
  out.reserve(reps.size());
  for (const Representation& r : reps) {
    try {
      out.push_back(ProjectRepresentation(r, probe, params));
    } catch (const Error& e) {
      const std::string what = e.what();
      if (what.find("'" + r.id + "'") != std::string::npos) throw;
      throw Error(e.code(), "representation '" + r.id + "': " + what);
    }
  }
  return out;
}

}  // namespace spirekit
