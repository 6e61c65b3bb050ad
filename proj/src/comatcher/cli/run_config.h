#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "comatcher/features/synthetic_scene.h"
#include "comatcher/grouping/group_images.h"
#include "comatcher/net/net_config.h"
#include "comatcher/pipeline/connect.h"
#include "comatcher/pipeline/pipeline.h"
#include "comatcher/training/trainer.h"

namespace comatcher {

// Everything that can influence an output artifact. Worker count is not part
// of it: outputs never depend on it.
struct RunConfig {
  uint64_t seed = 0;
  SceneConfig scene;
  NetConfig net;
  TrainConfig train;  // seed and jobs come from the run
  GroupingOptions grouping;
  ConnectOptions connect;  // seed comes from the run
  AblationSwitches ablation;
  OverlapSource overlap = OverlapSource::kDescriptors;
  TargetMatcher matcher = TargetMatcher::kLearned;
  double verify_px = 3.0;
  int benchmark_seeds = 20;
  int benchmark_group_size = 4;

  // Throws Error("invalid-config").
  void Validate() const;
  PipelineConfig Pipeline(int jobs) const;
};

nlohmann::json RunConfigToJson(const RunConfig& config);
// Strict: unknown keys throw Error("unknown-key"); absent keys keep `base`.
RunConfig RunConfigFromJson(const nlohmann::json& j, RunConfig base = {});

// Sets a dotted key ("net.dim") to a value given as text. The text is parsed
// as JSON when possible, else taken as a string.
void ApplyOverride(nlohmann::json* config, const std::string& assignment);

// defaults < config file < overrides < flag patches (already in JSON form).
RunConfig ResolveRunConfig(const std::string& config_path,
                           const std::vector<std::string>& overrides,
                           const nlohmann::json& flag_patch);

}  // namespace comatcher
