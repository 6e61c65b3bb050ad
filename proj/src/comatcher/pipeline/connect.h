#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "comatcher/features/image_features.h"
#include "comatcher/geometry/group_tracks.h"
#include "comatcher/match/match_head.h"

namespace comatcher {

inline constexpr double kConnectSimilarity = 0.75;

// Descriptor matching baseline: mutual nearest neighbours with cosine
// similarity above `min_similarity`, scored by similarity.
MatchSet DescriptorMatches(const ImageFeatures& a, const ImageFeatures& b,
                           double min_similarity = kConnectSimilarity);

struct ConnectOptions {
  double min_similarity = kConnectSimilarity;
  double inlier_px = 3.0;
  // Four points always fit a homography; pairs with fewer inliers than this
  // are treated as failed.
  int min_inliers = 8;
  uint64_t seed = 0;
};

// Intra-group tracks: every pair of views is matched with
// DescriptorMatches, filtered by a RANSAC homography and chained. A pair
// whose verification fails contributes nothing and is reported in `log`.
// `pair_sets`, when given, receives the kept match set of every pair (i, j),
// i < j.
GroupTracks ConnectGroup(
    const std::vector<const ImageFeatures*>& views,
    const ConnectOptions& options = {}, std::vector<std::string>* log = nullptr,
    std::map<std::pair<int, int>, MatchSet>* pair_sets = nullptr);

}  // namespace comatcher
