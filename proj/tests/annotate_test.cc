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

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "spirekit/error.h"
#include "test_support.h"

namespace spirekit {
namespace {

using testing::BruteForceKnn;
using testing::NineBlobs;

Segment Seg(std::string id, Color c, std::optional<bool> ref = std::nullopt) {
  Segment s;
  s.id = std::move(id);
  s.image_id = "img";
  s.mean_color = c;
  s.reference_label = ref;
  return s;
}

// Every cluster maps to exactly one blob and every blob to one cluster.
bool RecoversBlobs(const ClusterModel& model, const std::vector<int>& blob_of) {
  std::map<int, std::set<int>> blobs_in_cluster, clusters_of_blob;
  for (std::size_t i = 0; i < blob_of.size(); ++i) {
    blobs_in_cluster[model.assignment[i]].insert(blob_of[i]);
    clusters_of_blob[blob_of[i]].insert(model.assignment[i]);
  }
  if (blobs_in_cluster.size() != 9 || clusters_of_blob.size() != 9) return false;
  for (const auto& [c, blobs] : blobs_in_cluster) if (blobs.size() != 1) return false;
  for (const auto& [b, clusters] : clusters_of_blob) if (clusters.size() != 1) return false;
  return true;
}

std::map<int, bool> LabelsFromBlobs(const ClusterModel& model, const std::vector<int>& blob_of,
                                    int sticker_blob) {
  std::map<int, bool> labels;
  for (std::size_t i = 0; i < blob_of.size(); ++i) {
    labels[model.assignment[i]] = blob_of[i] == sticker_blob;
  }
  return labels;
}

TEST(ValidateSegment, Range) {
  EXPECT_NO_THROW(ValidateSegment(Seg("a", {0, 128, 255})));
  EXPECT_THROW(ValidateSegment(Seg("a", {0, 256, 0})), Error);
  EXPECT_THROW(ValidateSegment(Seg("a", {-1, 0, 0})), Error);
  EXPECT_THROW(ValidateSegment(Seg("a", {std::nan(""), 0, 0})), Error);
}

TEST(ClusterSegments, RecoversWellSeparatedBlobs) {
  const auto f = NineBlobs(20, 8.0, 3);
  const ClusterModel model = ClusterSegments(f.segments);
  EXPECT_TRUE(RecoversBlobs(model, f.blob_of));
  EXPECT_EQ(model.linkage.size(), f.segments.size() - 9);
  // Cluster ids in order of first member.
  EXPECT_EQ(model.assignment[0], 0);
  int next = 0;
  for (int c : model.assignment) {
    EXPECT_LE(c, next);
    if (c == next) ++next;
  }
  EXPECT_EQ(next, 9);
}

TEST(ClusterSegments, SingletonsAtNine) {
  const auto f = NineBlobs(1, 0.0, 0);
  const ClusterModel model = ClusterSegments(f.segments);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(model.assignment[i], static_cast<int>(i));
  EXPECT_TRUE(model.linkage.empty());
}

TEST(ClusterSegments, TooFew) {
  const auto f = NineBlobs(1, 0.0, 0);
  try {
    ClusterSegments(std::span(f.segments).first(8));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewSegments);
  }
}

TEST(ClusterSegments, Deterministic) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  std::vector<Segment> segs;
  for (int i = 0; i < 60; ++i) segs.push_back(Seg("s" + std::to_string(i), {u(rng), u(rng), u(rng)}));
  const ClusterModel a = ClusterSegments(segs);
  const ClusterModel b = ClusterSegments(segs);
  EXPECT_EQ(a.assignment, b.assignment);
  ASSERT_EQ(a.linkage.size(), b.linkage.size());
  for (std::size_t i = 0; i < a.linkage.size(); ++i) {
    EXPECT_EQ(a.linkage[i].into, b.linkage[i].into);
    EXPECT_EQ(a.linkage[i].merged, b.linkage[i].merged);
  }
}

TEST(ClusterSegments, EqualDistanceTieUsesSmallestPair) {
  // Ten points on a line at unit spacing: every adjacent pair ties at
  // distance 1, so the first merge must be (0, 1).
  std::vector<Segment> segs;
  for (int i = 0; i < 10; ++i) segs.push_back(Seg("s" + std::to_string(i), {10.0 * i, 0, 0}));
  const ClusterModel m = ClusterSegments(segs);
  ASSERT_EQ(m.linkage.size(), 1u);
  EXPECT_EQ(m.linkage[0].into, 0u);
  EXPECT_EQ(m.linkage[0].merged, 1u);
  EXPECT_EQ(m.assignment[0], m.assignment[1]);
}

TEST(ClusterSegments, PropertyMergeDistancesNonDecreasing) {
  // Average linkage is a monotone (reducible) linkage.
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Segment> segs;
    for (int i = 0; i < 80; ++i) segs.push_back(Seg(std::to_string(i), {u(rng), u(rng), u(rng)}));
    const ClusterModel m = ClusterSegments(segs);
    for (std::size_t i = 1; i < m.linkage.size(); ++i) {
      EXPECT_GE(m.linkage[i].distance, m.linkage[i - 1].distance - 1e-9);
    }
    std::set<int> ids(m.assignment.begin(), m.assignment.end());
    EXPECT_EQ(ids.size(), 9u);
  }
}

TEST(LabelClusters, RequiresEveryCluster) {
  const auto f = NineBlobs(3, 5.0, 1);
  const ClusterModel model = ClusterSegments(f.segments);
  std::map<int, bool> partial;
  for (int c = 0; c < 8; ++c) partial[c] = false;
  try {
    LabelClusters(model, partial);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompleteLabeling);
    EXPECT_NE(std::string(e.what()).find('8'), std::string::npos);
  }
  EXPECT_THROW(KnnClassify(model, f.segments[0]), Error);
}

TEST(LabelClusters, AllNegativeAndIdempotent) {
  const auto f = NineBlobs(3, 5.0, 1);
  std::map<int, bool> none;
  for (int c = 0; c < 9; ++c) none[c] = false;
  const ClusterModel labeled = LabelClusters(ClusterSegments(f.segments), none);
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  for (int i = 0; i < 200; ++i) {
    EXPECT_FALSE(KnnClassify(labeled, Seg("q", {u(rng), u(rng), u(rng)})));
  }
  const ClusterModel twice = LabelClusters(labeled, none);
  EXPECT_EQ(twice.labels, labeled.labels);
  EXPECT_EQ(twice.assignment, labeled.assignment);
}

TEST(KnnClassify, OnePositiveClusterOnlyNearItsBlob) {
  const auto f = NineBlobs(20, 8.0, 5);
  const ClusterModel model = ClusterSegments(f.segments);
  const ClusterModel labeled = LabelClusters(model, LabelsFromBlobs(model, f.blob_of, 8));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  for (int i = 0; i < 2000; ++i) {
    const Segment q = Seg("q", {u(rng), u(rng), u(rng)});
    const int oracle_cluster = BruteForceKnn(labeled, q.mean_color, kDefaultNeighbors);
    EXPECT_EQ(KnnClassify(labeled, q), *labeled.labels[static_cast<std::size_t>(oracle_cluster)]);
  }
  // Training segments map to their own blob.
  for (std::size_t i = 0; i < f.segments.size(); ++i) {
    EXPECT_EQ(KnnClassify(labeled, f.segments[i]), f.blob_of[i] == 8);
  }
}

TEST(KnnCluster, QueryEqualToTrainingSegment) {
  const auto f = NineBlobs(5, 6.0, 8);
  const ClusterModel model = ClusterSegments(f.segments);
  for (std::size_t i = 0; i < f.segments.size(); ++i) {
    EXPECT_EQ(KnnCluster(model, f.segments[i].mean_color, 1), model.assignment[i]);
  }
}

TEST(KnnCluster, EquidistantQueryFollowsTieRule) {
  // Two tight clusters along the red axis plus seven far singletons; the
  // midpoint query is equidistant from both and k=2 splits the vote, so
  // the nearest-ranked neighbor (smaller id among equals) decides.
  std::vector<Segment> segs = {Seg("a", {100, 0, 0}), Seg("b", {140, 0, 0})};
  for (int i = 0; i < 7; ++i) segs.push_back(Seg("z" + std::to_string(i), {0, 30.0 * i + 60, 255}));
  const ClusterModel m = ClusterSegments(segs);
  const int c = KnnCluster(m, {120, 0, 0}, 2);
  EXPECT_EQ(c, m.assignment[0]);
  EXPECT_EQ(c, BruteForceKnn(m, {120, 0, 0}, 2));
  EXPECT_EQ(KnnCluster(m, {120, 0, 0}, 2), c);
}

TEST(KnnCluster, AgreesWithExhaustiveOracle) {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  std::vector<Segment> segs;
  for (int i = 0; i < 150; ++i) segs.push_back(Seg("s" + std::to_string(i), {u(rng), u(rng), u(rng)}));
  const ClusterModel m = ClusterSegments(segs);
  for (int k : {1, 3, 5, 8}) {
    for (int i = 0; i < 1000; ++i) {
      const Color q = {u(rng), u(rng), u(rng)};
      ASSERT_EQ(KnnCluster(m, q, k), BruteForceKnn(m, q, k)) << k;
    }
  }
  EXPECT_THROW(KnnCluster(m, {0, 0, 0}, 0), Error);
}

TEST(ScoreAnnotations, Examples) {
  const std::vector<std::optional<bool>> refs = {true, false, true, std::nullopt, false};
  const bool perfect[] = {true, false, true, true, false};
  const AnnotationQuality q = ScoreAnnotations(perfect, refs);
  EXPECT_EQ(q.precision, 1.0);
  EXPECT_EQ(q.recall, 1.0);
  EXPECT_EQ(q.scored, 4u);

  const bool negative[] = {false, false, false, false, false};
  const AnnotationQuality n = ScoreAnnotations(negative, refs);
  EXPECT_EQ(n.recall, 0.0);
  EXPECT_FALSE(n.precision.has_value());

  const std::vector<std::optional<bool>> none(5);
  try {
    ScoreAnnotations(perfect, none);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingReferences);
  }
  EXPECT_THROW(ScoreAnnotations(std::span(perfect).first(2), refs), Error);
}

TEST(ScoreAnnotations, PlantedStickerFixtureMatchesHandCount) {
  // Sticker blob plus a near-sticker blob that k-NN must not confuse; the
  // reference marks three segments of a non-sticker blob as stickers to
  // create known false negatives.
  auto f = NineBlobs(10, 6.0, 9);
  std::size_t mislabeled = 0;
  for (std::size_t i = 0; i < f.segments.size() && mislabeled < 3; ++i) {
    if (f.blob_of[i] == 0) {
      f.segments[i].reference_label = true;
      ++mislabeled;
    }
  }
  const ClusterModel model = ClusterSegments(f.segments);
  const ClusterModel labeled = LabelClusters(model, LabelsFromBlobs(model, f.blob_of, 8));
  auto preds = std::make_unique<bool[]>(f.segments.size());
  std::vector<std::optional<bool>> refs;
  for (std::size_t i = 0; i < f.segments.size(); ++i) {
    preds[i] = KnnClassify(labeled, f.segments[i]);
    refs.push_back(f.segments[i].reference_label);
  }
  const AnnotationQuality q =
      ScoreAnnotations(std::span<const bool>(preds.get(), f.segments.size()), refs);
  EXPECT_EQ(q.true_positives, 10u);
  EXPECT_EQ(q.false_positives, 0u);
  EXPECT_EQ(q.false_negatives, 3u);
  EXPECT_EQ(q.precision, 1.0);
  EXPECT_DOUBLE_EQ(*q.recall, 10.0 / 13.0);
}

}  // namespace
}  // namespace spirekit
