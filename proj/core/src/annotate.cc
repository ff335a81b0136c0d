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

#include "spirekit/annotate.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "spirekit/error.h"

namespace spirekit {

void ValidateSegment(const Segment& s) {
  for (double c : s.mean_color) {
    if (!std::isfinite(c) || c < 0.0 || c > 255.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "segment '" + s.id + "' has a color channel outside [0, 255]");
    }
  }
}

double ColorDistance(const Color& a, const Color& b) {
  const double dr = a[0] - b[0];
  const double dg = a[1] - b[1];
  const double db = a[2] - b[2];
  return std::sqrt(dr * dr + dg * dg + db * db);
}

bool ClusterModel::labeled() const {
  return std::all_of(labels.begin(), labels.end(),
                     [](const auto& l) { return l.has_value(); });
}

std::vector<std::size_t> ClusterModel::Members(int cluster) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == cluster) out.push_back(i);
  }
  return out;
}

namespace {

// Condensed symmetric distance matrix.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * (n - 1) / 2) {}

  double& at(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return d_[Offset(i) + (j - i - 1)];
  }

 private:
  std::size_t Offset(std::size_t i) const { return i * (2 * n_ - i - 1) / 2; }

  std::size_t n_;
  std::vector<double> d_;
};

struct Candidate {
  double distance = std::numeric_limits<double>::infinity();
  std::size_t a = 0;  // a < b
  std::size_t b = 0;

  bool operator<(const Candidate& o) const {
    return std::tie(distance, a, b) < std::tie(o.distance, o.a, o.b);
  }
};

Candidate MakeCandidate(double d, std::size_t i, std::size_t j) {
  return {d, std::min(i, j), std::max(i, j)};
}

}  // namespace

ClusterModel ClusterSegments(std::span<const Segment> segments) {
  const std::size_t n = segments.size();
  if (n < static_cast<std::size_t>(kNumClusters)) {
    throw Error(ErrorCode::kTooFewSegments,
                "need at least " + std::to_string(kNumClusters) + " segments, got " +
                    std::to_string(n));
  }
  for (const Segment& s : segments) ValidateSegment(s);

  ClusterModel model;
  model.training.assign(segments.begin(), segments.end());

  DistanceMatrix dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist.at(i, j) = ColorDistance(segments[i].mean_color, segments[j].mean_color);
    }
  }
  std::vector<bool> active(n, true);
  std::vector<std::size_t> size(n, 1);
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<Candidate> nearest(n);

  auto refresh = [&](std::size_t i) {
    Candidate best;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !active[j]) continue;
      const Candidate c = MakeCandidate(dist.at(i, j), i, j);
      if (c < best) best = c;
    }
    nearest[i] = best;
  };
  for (std::size_t i = 0; i < n; ++i) refresh(i);

  std::size_t clusters = n;
  while (clusters > static_cast<std::size_t>(kNumClusters)) {
    Candidate best;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] && nearest[i] < best) best = nearest[i];
    }
    const std::size_t into = best.a;
    const std::size_t gone = best.b;
    const double wa = static_cast<double>(size[into]);
    const double wb = static_cast<double>(size[gone]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == into || k == gone) continue;
      dist.at(into, k) = (wa * dist.at(into, k) + wb * dist.at(gone, k)) / (wa + wb);
    }
    active[gone] = false;
    parent[gone] = into;
    size[into] += size[gone];
    --clusters;
    model.linkage.push_back({into, gone, best.distance, size[into]});

    refresh(into);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == into) continue;
      if (nearest[k].a == into || nearest[k].b == into || nearest[k].a == gone ||
          nearest[k].b == gone) {
        refresh(k);
      } else {
        // Average-linkage distances to the merged cluster never drop below
        // k's current nearest distance, but an equal one may win the tie.
        const Candidate c = MakeCandidate(dist.at(into, k), k, into);
        if (c < nearest[k]) nearest[k] = c;
      }
    }
  }

  auto root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i];
    return i;
  };
  std::vector<int> cluster_of_root(n, -1);
  int next_id = 0;
  model.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = root(i);
    if (cluster_of_root[r] < 0) cluster_of_root[r] = next_id++;
    model.assignment[i] = cluster_of_root[r];
  }
  return model;
}

ClusterModel LabelClusters(ClusterModel model, const std::map<int, bool>& labels) {
  std::string missing;
  for (int c = 0; c < kNumClusters; ++c) {
    const auto it = labels.find(c);
    if (it == labels.end()) {
      if (!missing.empty()) missing += ", ";
      missing += std::to_string(c);
      continue;
    }
    model.labels[static_cast<std::size_t>(c)] = it->second;
  }
  for (const auto& [c, label] : labels) {
    if (c < 0 || c >= kNumClusters) {
      throw Error(ErrorCode::kInvalidArgument,
                  "cluster id " + std::to_string(c) + " out of range");
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kIncompleteLabeling, "clusters without a label: " + missing);
  }
  return model;
}

int KnnCluster(const ClusterModel& model, const Color& color, int k) {
  if (model.training.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cluster model has no training segments");
  }
  if (k <= 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  struct Neighbor {
    double distance;
    const std::string* id;
    std::size_t index;
  };
  std::vector<Neighbor> neighbors;
  neighbors.reserve(model.training.size());
  for (std::size_t i = 0; i < model.training.size(); ++i) {
    neighbors.push_back({ColorDistance(color, model.training[i].mean_color),
                         &model.training[i].id, i});
  }
  const auto closer = [](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return *a.id < *b.id;
  };
  const std::size_t kk = std::min(static_cast<std::size_t>(k), neighbors.size());
  std::partial_sort(neighbors.begin(), neighbors.begin() + static_cast<std::ptrdiff_t>(kk),
                    neighbors.end(), closer);

  std::array<int, kNumClusters> votes{};
  std::array<std::size_t, kNumClusters> first_rank;
  first_rank.fill(std::numeric_limits<std::size_t>::max());
  for (std::size_t r = 0; r < kk; ++r) {
    const int c = model.assignment[neighbors[r].index];
    ++votes[static_cast<std::size_t>(c)];
    first_rank[static_cast<std::size_t>(c)] =
        std::min(first_rank[static_cast<std::size_t>(c)], r);
  }
  int winner = 0;
  for (int c = 1; c < kNumClusters; ++c) {
    const auto uc = static_cast<std::size_t>(c);
    const auto uw = static_cast<std::size_t>(winner);
    if (votes[uc] > votes[uw] || (votes[uc] == votes[uw] && first_rank[uc] < first_rank[uw])) {
      winner = c;
    }
  }
  return winner;
}

bool KnnClassify(const ClusterModel& model, const Segment& segment, int k) {
  if (!model.labeled()) {
    throw Error(ErrorCode::kIncompleteLabeling, "cluster model is not fully labeled");
  }
  const int c = KnnCluster(model, segment.mean_color, k);
  return *model.labels[static_cast<std::size_t>(c)];
}

AnnotationQuality ScoreAnnotations(std::span<const bool> predictions,
                                   std::span<const std::optional<bool>> references) {
  if (predictions.size() != references.size()) {
    throw Error(ErrorCode::kInvalidArgument, "predictions and references differ in length");
  }
  AnnotationQuality q;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!references[i]) continue;
    ++q.scored;
    const bool truth = *references[i];
    if (predictions[i] && truth) ++q.true_positives;
    if (predictions[i] && !truth) ++q.false_positives;
    if (!predictions[i] && truth) ++q.false_negatives;
  }
  if (q.scored == 0) {
    throw Error(ErrorCode::kMissingReferences, "no segment carries a reference label");
  }
  const std::size_t predicted = q.true_positives + q.false_positives;
  const std::size_t actual = q.true_positives + q.false_negatives;
  if (predicted > 0) {
    q.precision = static_cast<double>(q.true_positives) / static_cast<double>(predicted);
  }
  if (actual > 0) {
    q.recall = static_cast<double>(q.true_positives) / static_cast<double>(actual);
  }
  return q;
}

}  // namespace spirekit
