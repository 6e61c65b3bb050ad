#pragma once

#include <vector>

#include "comatcher/features/synthetic_scene.h"
#include "comatcher/match/match_head.h"
#include "comatcher/pipeline/global_tracks.h"

namespace comatcher {

struct PrecisionRecall {
  double precision = 1.0;
  double recall = 1.0;
  int correct = 0;
  int considered = 0;  // predicted pairs with a labeled endpoint
  int gt = 0;
  bool precision_empty = false;  // no considered predictions
  bool recall_empty = false;     // no gt matches
};

// A predicted pair is correct iff it is a gt match. Pairs whose endpoints
// are both unlabeled (dead zone) are ignored; empty denominators give 1.
PrecisionRecall ComputePrecisionRecall(const MatchSet& predicted,
                                       const GtLabels& gt);
// Pools the counts of several pairs.
PrecisionRecall Pool(const std::vector<PrecisionRecall>& parts);

// Per threshold T: mean over samples of max(0, 1 - e / T), i.e. the area
// under the cumulative error curve on [0, T] divided by T. Infinite errors
// count as failures. Throws Error("empty-eval") for no samples and
// Error("invalid-error") for negative or NaN errors.
std::vector<double> CornerAuc(const std::vector<double>& errors,
                              const std::vector<double>& thresholds = {1, 3,
                                                                       5});

struct TrackStats {
  int num_landmarks = 0;        // NL
  double mean_track_length = 0;  // TL
};
TrackStats ComputeTrackStats(const std::vector<GlobalTrack>& tracks);

}  // namespace comatcher
