#pragma once

#include <vector>

#include "comatcher/core/param_store.h"
#include "comatcher/features/image_features.h"
#include "comatcher/geometry/group_tracks.h"
#include "comatcher/match/match_head.h"
#include "comatcher/net/comatcher_net.h"

namespace comatcher {

// One forward of the network for the whole group, then the match head and
// filtering per (source, target) pair. Result i belongs to sources[i].
std::vector<MatchSet> MatchGroupToTarget(
    const std::vector<const ImageFeatures*>& sources,
    const ImageFeatures& target, const GroupTracks& tracks,
    const ParamStore& params, const NetConfig& config,
    const AblationSwitches& ablation = {});

// Assignment matrices of the same forward pass, for inspection.
std::vector<Tensor2> GroupAssignments(
    const std::vector<const ImageFeatures*>& sources,
    const ImageFeatures& target, const GroupTracks& tracks,
    const ParamStore& params, const NetConfig& config,
    const AblationSwitches& ablation = {});

}  // namespace comatcher
