#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "comatcher/core/param_store.h"
#include "comatcher/features/image_features.h"

namespace comatcher {

enum class PositionScale {
  kPixels,  // relative positions in raw pixels
  kImage,   // pixels times 2 / max(width, height)
};

struct NetConfig {
  int dim = 64;
  int layers = 9;
  int heads = 4;
  int max_sources = 4;
  // One gate threshold per layer with a confidence head (layers - 1 values).
  // Empty means the default linear ramp from 0.1 to 0.8.
  std::vector<double> theta_schedule;
  double match_threshold = 0.1;
  PositionScale position_scale = PositionScale::kImage;

  int head_dim() const { return dim / heads; }
  // The explicit schedule or the default ramp.
  std::vector<double> Thetas() const;
  // Throws Error("invalid-config") when an invariant is violated.
  void Validate() const;
};

std::vector<double> DefaultThetaSchedule(int layers);

// Inference-time switches used by the ablation benchmark.
struct AblationSwitches {
  bool source_cross = true;   // multi-view feature interaction
  bool propagation = true;    // track-based relative positions
  bool correlation = true;    // confidence-gated distribution blending
};

// Parameter names, grouped by layer and block:
//   layers.<l>.<block>.{q,k,v}.{weight,bias}
//   layers.<l>.<block>.update.*            (perceptron 2d -> 2d -> d)
//   layers.<l>.{self,source_cross}.rotary  (head_dim/2 x 2)
//   layers.<l>.confidence.*                (perceptron d -> 2d -> 1)
//   head.proj.{weight,bias}, head.matchability.{weight,bias}
// with block in {self, source_cross, target_cross, cross}.
std::string BlockPrefix(int layer, const std::string& block);

ParamStore InitNetParams(const NetConfig& config, uint64_t seed);

// Throws Error("shape-mismatch") naming the first missing or misshaped
// parameter.
void CheckNetParams(const NetConfig& config, const ParamStore& params);

nlohmann::json NetConfigToJson(const NetConfig& config);
// Fields absent from `j` keep their value in `base`; unknown keys throw
// Error("unknown-key").
NetConfig NetConfigFromJson(const nlohmann::json& j, NetConfig base = {},
                            const std::string& scope = "net");
nlohmann::json AblationToJson(const AblationSwitches& a);
AblationSwitches AblationFromJson(const nlohmann::json& j,
                                  AblationSwitches base = {},
                                  const std::string& scope = "ablation");

double PositionScaleFor(const NetConfig& config, const ImageFeatures& image);

}  // namespace comatcher
