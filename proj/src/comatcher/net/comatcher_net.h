#pragma once

#include <utility>
#include <vector>

#include "comatcher/core/autodiff.h"
#include "comatcher/core/param_store.h"
#include "comatcher/features/image_features.h"
#include "comatcher/geometry/group_tracks.h"
#include "comatcher/net/net_config.h"

namespace comatcher {

// Inputs shared by every pair of one group-vs-target evaluation. Positions
// are keypoints multiplied by the image's position scale.
struct GroupInput {
  std::vector<const ImageFeatures*> sources;
  const ImageFeatures* target = nullptr;
  const GroupTracks* tracks = nullptr;  // views are the sources, in order
  std::vector<Tensor2> source_positions;
  Tensor2 target_position;

  int num_pairs() const { return static_cast<int>(sources.size()); }
};

// Throws Error("shape-mismatch") on descriptor-dimension or track-size
// disagreement and Error("too-many-sources") above max_sources.
GroupInput MakeGroupInput(const NetConfig& config,
                          std::vector<const ImageFeatures*> sources,
                          const ImageFeatures& target,
                          const GroupTracks& tracks);

// Evolving features of one (source, target) pair.
struct PairState {
  ad::Var source;
  ad::Var target;
};

// One state per source; every pair gets its own copy of the target
// descriptors.
std::vector<PairState> PairBroadcast(ad::Tape& tape, const GroupInput& input);

ad::Var SelfAttention(ad::Tape& tape, const ParamStore& params,
                      const NetConfig& config, int layer, ad::Var x,
                      const Tensor2& positions);

// Source points attend to every other source view, averaged uniformly over
// views. Identity for a single pair.
std::vector<ad::Var> SourceCrossAttention(ad::Tape& tape,
                                          const ParamStore& params,
                                          const NetConfig& config, int layer,
                                          const GroupInput& input,
                                          const std::vector<ad::Var>& sources,
                                          bool propagation);

// Target point t of each pair attends to point t of the other pairs.
// Identity for a single pair.
std::vector<ad::Var> TargetCrossAttention(ad::Tape& tape,
                                          const ParamStore& params,
                                          const NetConfig& config, int layer,
                                          const std::vector<ad::Var>& targets);

// Per-point confidence in (0, 1), N x 1.
ad::Var ConfidenceEstimate(ad::Tape& tape, const ParamStore& params,
                           int layer, ad::Var source);

// Bidirectional source/target attention. When `confidence` is non-empty the
// source-side distributions go through MvCorrelate with `theta`.
void TwoViewCrossAttention(ad::Tape& tape, const ParamStore& params,
                           const NetConfig& config, int layer,
                           const GroupInput& input,
                           const std::vector<ad::Var>& confidence,
                           double theta, std::vector<PairState>* states);

struct ForwardOptions {
  AblationSwitches ablation;
  bool keep_snapshots = false;
};

struct ForwardResult {
  std::vector<PairState> states;
  // confidence[l][i]: N_i x 1, for layers 0 .. L-2.
  std::vector<std::vector<ad::Var>> confidence;
  // snapshots[l][i]: (source, target) features at the end of layer l, for
  // layers 0 .. L-2, when requested.
  std::vector<std::vector<std::pair<Tensor2, Tensor2>>> snapshots;
};

// Errors raised inside a layer are rethrown with the layer index prepended.
ForwardResult Forward(ad::Tape& tape, const ParamStore& params,
                      const NetConfig& config, const GroupInput& input,
                      const ForwardOptions& options = {});

}  // namespace comatcher
