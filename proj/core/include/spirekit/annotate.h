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

#ifndef SPIREKIT_ANNOTATE_H_
#define SPIREKIT_ANNOTATE_H_

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spirekit {

inline constexpr int kNumClusters = 9;
inline constexpr int kDefaultNeighbors = 5;

using Color = std::array<double, 3>;

// An image segment summarized by its mean RGB color.
struct Segment {
  std::string id;
  std::string image_id;
  Color mean_color{};
  // Ground truth "is sticker", used only to score annotation quality.
  std::optional<bool> reference_label;
};

// Throws InvalidArgument unless every channel is finite and in [0, 255].
void ValidateSegment(const Segment& s);

double ColorDistance(const Color& a, const Color& b);

// One agglomeration step. Clusters are named by their smallest member
// index in the training order; `merged` joins into `into`.
struct MergeStep {
  std::size_t into = 0;
  std::size_t merged = 0;
  double distance = 0.0;
  std::size_t size = 0;  // size of the resulting cluster
};

struct ClusterModel {
  std::vector<Segment> training;
  // Cluster id in [0, kNumClusters) per training segment. Ids are ordered
  // by each cluster's first member in training order.
  std::vector<int> assignment;
  std::array<std::optional<bool>, kNumClusters> labels{};
  std::vector<MergeStep> linkage;

  bool labeled() const;
  std::vector<std::size_t> Members(int cluster) const;
};

// Average-linkage agglomerative clustering on Euclidean RGB distance, cut
// at nine clusters. Among equally distant candidate merges the one with the
// lexicographically smallest (cluster, cluster) pair wins. Throws
// TooFewSegments below nine segments.
ClusterModel ClusterSegments(std::span<const Segment> segments);

// Attaches a sticker/not-sticker label to every cluster. Throws
// IncompleteLabeling when any of the nine clusters is missing.
ClusterModel LabelClusters(ClusterModel model, const std::map<int, bool>& labels);

// The k nearest training segments (distance ties broken by segment id) vote
// for a cluster; vote ties go to the tied cluster whose member ranks
// nearest.
int KnnCluster(const ClusterModel& model, const Color& color,
               int k = kDefaultNeighbors);

// Label of the cluster KnnCluster picks. Throws IncompleteLabeling on an
// unlabeled model.
bool KnnClassify(const ClusterModel& model, const Segment& segment,
                 int k = kDefaultNeighbors);

struct AnnotationQuality {
  std::optional<double> precision;  // undefined without predicted positives
  std::optional<double> recall;     // undefined without reference positives
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t scored = 0;
};

// Precision/recall of the sticker class over the entries that carry a
// reference label. Throws MissingReferences if none do, InvalidArgument on
// length mismatch.
AnnotationQuality ScoreAnnotations(std::span<const bool> predictions,
                                   std::span<const std::optional<bool>> references);

}  // namespace spirekit

#endif  // SPIREKIT_ANNOTATE_H_
