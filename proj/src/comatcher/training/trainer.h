#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "comatcher/core/param_store.h"
#include "comatcher/features/scene_bundle.h"
#include "comatcher/features/synthetic_scene.h"
#include "comatcher/geometry/group_tracks.h"
#include "comatcher/net/net_config.h"
#include "comatcher/training/losses.h"

namespace comatcher {

struct TrainConfig {
  double learning_rate = 0.5;
  int steps = 200;
  int batch_scenes = 16;
  uint64_t seed = 0;
  double clip_norm = 1.0;
  double alpha = kDefaultLossAlpha;
  int checkpoint_every = 0;  // 0: only at the end
  int jobs = 1;

  // Throws Error("invalid-config").
  void Validate() const;
};

// One training group: sources 0..M-1 and one target, with the ground-truth
// tracks among the sources and the labels of every (source, target) pair.
struct TrainSample {
  std::vector<ImageFeatures> sources;
  ImageFeatures target;
  GroupTracks tracks;
  std::vector<GtLabels> labels;
};

// Views 0..M-1 of the scene are the sources and view M is the target.
TrainSample SampleFromScene(const SyntheticScene& scene);
// Same layout from a stored bundle: the last image is the target.
TrainSample SampleFromBundle(const SceneBundle& bundle);

struct LossRecord {
  int step = 0;
  double total = 0.0;
  double corr = 0.0;  // mean per-pair correspondence term
  double conf = 0.0;  // mean per-pair confidence term
};

// Scene i of the stream.
using SampleSource = std::function<TrainSample(uint64_t index)>;
// Called every checkpoint_every steps (after the update) and at the end.
using CheckpointSink = std::function<void(int step, const ParamStore&)>;

// Plain gradient descent with global-norm clipping. Step s uses scenes
// s*B .. s*B+B-1; their gradients are summed in ascending scene order and
// averaged. Throws NumericError("nonfinite-loss") naming the step.
std::vector<LossRecord> Train(ParamStore* params, const NetConfig& net,
                              const TrainConfig& config,
                              const SampleSource& samples,
                              const CheckpointSink& checkpoint = {});

// Loss and prediction for one sample without gradients.
LossBreakdown EvaluateSample(const ParamStore& params, const NetConfig& net,
                             const TrainSample& sample,
                             double alpha = kDefaultLossAlpha);

void WriteLossCsv(const std::string& path,
                  const std::vector<LossRecord>& curve);

}  // namespace comatcher
