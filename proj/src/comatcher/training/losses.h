#pragma once

#include <utility>
#include <vector>

#include "comatcher/core/autodiff.h"
#include "comatcher/core/param_store.h"
#include "comatcher/features/synthetic_scene.h"
#include "comatcher/match/match_head.h"
#include "comatcher/net/comatcher_net.h"

namespace comatcher {

// Negative log-likelihood of the labeled matches plus the balanced
// non-match terms on both sides. Empty label sets contribute 0. Throws
// Error("empty-supervision") when all three sets are empty and
// Error("index-out-of-range") for bad labels.
ad::Var CorrespondenceLoss(const PairPrediction& prediction,
                           const GtLabels& labels);
double CorrespondenceLossValue(const Tensor2& assignment,
                               const VectorX& sigma_source,
                               const VectorX& sigma_target,
                               const GtLabels& labels);

// labels[l](u) is 1 when the layer-l match of source point u agrees with its
// final match (same partner, or unmatched in both), else 0. Intermediate
// matches are dual-softmax plus mutual argmax on the raw layer features.
std::vector<VectorX> ConfidenceLabels(
    const std::vector<std::pair<Tensor2, Tensor2>>& layer_features,
    const MatchSet& final_matches, double threshold);

// Per-layer summed binary cross-entropy, averaged over layers.
ad::Var ConfidenceLoss(const std::vector<ad::Var>& confidence,
                       const std::vector<VectorX>& labels);
double ConfidenceLossValue(const std::vector<VectorX>& confidence,
                           const std::vector<VectorX>& labels);

inline constexpr double kDefaultLossAlpha = 0.5;

struct LossBreakdown {
  double total = 0.0;
  std::vector<double> corr;
  std::vector<double> conf;
  double alpha = kDefaultLossAlpha;
};

// total = mean over pairs of corr + alpha * conf.
LossBreakdown TotalLoss(std::vector<double> corr, std::vector<double> conf,
                        double alpha = kDefaultLossAlpha);

struct GroupLoss {
  ad::Var total;
  LossBreakdown breakdown;
};

// Full forward of one group against its target and the combined loss.
// labels[i] are the ground-truth labels of pair (source i, target). A pair
// without any labels contributes 0 to both terms.
GroupLoss ComputeGroupLoss(ad::Tape& tape, const ParamStore& params,
                           const NetConfig& config, const GroupInput& input,
                           const std::vector<GtLabels>& labels,
                           double alpha = kDefaultLossAlpha);

}  // namespace comatcher
