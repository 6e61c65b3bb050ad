#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "comatcher/features/image_features.h"
#include "comatcher/geometry/homography.h"

namespace comatcher {

struct SceneConfig {
  int num_points = 48;
  int num_sources = 4;  // M; the scene has M + 1 views
  double width = 640.0;
  double height = 480.0;
  // Corner of view quad k is drawn uniformly inside its frame quarter, at most
  // this fraction of the quarter's extent away from the frame corner.
  double corner_jitter = 0.5;
  int descriptor_dim = 64;
  double descriptor_noise_sigma = 0.05;
  double ambiguity_rate = 0.0;
  double dropout_rate = 0.0;
  // Per-view dropout override; entries < 0 fall back to dropout_rate.
  std::vector<double> view_dropout;
  // Plane points are kept at least this far apart (in plane pixels).
  double min_separation = 12.0;
  std::string id_prefix = "v";
};

// Ground-truth labels between images i and t: index pairs (u in i, x in t)
// and the points of each side known to have no partner.
struct GtLabels {
  std::vector<std::pair<int, int>> matches;
  std::vector<int> unmatched_source;
  std::vector<int> unmatched_target;
};

struct SyntheticScene {
  SceneConfig config;
  uint64_t seed = 0;
  std::vector<PixelPoint> world_points;  // label = index
  std::vector<Homography> homographies;  // plane -> view
  std::vector<std::vector<char>> visible;  // [view][label], after dropout
  std::vector<ImageFeatures> images;
  std::vector<std::vector<int>> keypoint_labels;  // [view][keypoint]
  // Label-based matches for every view pair (i < t).
  std::map<std::pair<int, int>, GtLabels> gt_pair_matches;

  int num_views() const { return static_cast<int>(images.size()); }
  // Maps pixels of view i to pixels of view t.
  Homography Between(int i, int t) const;
};

// Throws Error("degenerate-homography") when no convex corner quad is found
// in 100 attempts, Error("invalid-config") for num_points < 8 or M < 1.
SyntheticScene GenerateScene(uint64_t seed, const SceneConfig& config);

// Geometric labels: (u, x) matches iff same label and symmetric reprojection
// error <= inlier_px; a point is unmatched iff every keypoint of the other
// view is farther than outlier_px from it. Points in between are unlabeled.
GtLabels ComputeGtLabels(const SyntheticScene& scene, int i, int t,
                         double inlier_px = 3.0, double outlier_px = 5.0);

// Same rule on explicit data; labels < 0 never match.
GtLabels ComputeGtLabels(const ImageFeatures& a, const std::vector<int>& labels_a,
                         const ImageFeatures& b, const std::vector<int>& labels_b,
                         const Homography& a_to_b, double inlier_px,
                         double outlier_px);

GtLabels SwapGtLabels(const GtLabels& labels);

nlohmann::json SceneConfigToJson(const SceneConfig& config);
// Fields absent from `j` keep their value in `base`.
SceneConfig SceneConfigFromJson(const nlohmann::json& j, SceneConfig base = {},
                                const std::string& scope = "scene");

}  // namespace comatcher
