#pragma once

#include <cstdint>

#include "comatcher/features/image_features.h"
#include "comatcher/match/match_head.h"

namespace comatcher {

// Keeps the RANSAC homography inliers (symmetric error <= threshold_px).
// Dropped points move to the unmatched lists. Sets with fewer than four
// matches come back unchanged and flagged unverified; when no model reaches
// four inliers every match is dropped.
MatchSet GeometricVerify(const MatchSet& matches, const ImageFeatures& source,
                         const ImageFeatures& target,
                         double threshold_px = 3.0, uint64_t seed = 0);

}  // namespace comatcher
