#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "comatcher/features/image_features.h"
#include "comatcher/match/match_file.h"
#include "comatcher/pipeline/global_tracks.h"

namespace comatcher {

using ImageLabels = std::map<std::string, std::vector<int>>;

// Tracks of world labels seen in at least two images.
std::vector<GlobalTrack> GroundTruthTracks(
    const std::vector<ImageFeatures>& images, const ImageLabels& labels);

// Fraction of within-track entry pairs that share a world label; 1 for no
// tracks.
double TrackPrecision(const std::vector<GlobalTrack>& tracks,
                      const ImageLabels& labels);

// Redirects a `rate` fraction of all matches (chosen independently per
// match) to a different random target point.
std::vector<PairMatches> CorruptMatches(
    const std::vector<PairMatches>& matches,
    const std::map<std::string, int>& point_counts, double rate,
    uint64_t seed);

}  // namespace comatcher
