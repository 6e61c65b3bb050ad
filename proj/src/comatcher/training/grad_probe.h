#pragma once

#include <cstdint>

#include "comatcher/core/grad_check.h"
#include "comatcher/net/net_config.h"

namespace comatcher {

// Finite-difference check of the full group loss on a random toy group:
// `num_sources` sources and one target of `num_points` keypoints each, with
// tracks and labels on half of the points.
GradCheckResult NetworkGradCheck(const NetConfig& config, int num_sources,
                                 int num_points, uint64_t seed,
                                 double epsilon = 1e-6);

}  // namespace comatcher
