#pragma once

#include <map>
#include <string>
#include <vector>

#include "comatcher/features/image_features.h"
#include "comatcher/features/synthetic_scene.h"

namespace comatcher {

struct GtPairRecord {
  std::string i;
  std::string t;
  GtLabels labels;
};

// On-disk scene: features.jsonl, homographies.json (image_id -> plane to
// image, 9 row-major values), gt_matches.jsonl and labels.json (image_id ->
// world label per keypoint).
struct SceneBundle {
  std::vector<ImageFeatures> images;
  std::map<std::string, Homography> homographies;
  std::vector<GtPairRecord> gt;
  std::map<std::string, std::vector<int>> labels;

  int IndexOf(const std::string& image_id) const;
  // Labels for (i, t) in that orientation; throws "missing-gt".
  GtLabels Labels(const std::string& i, const std::string& t) const;
};

SceneBundle BundleFromScene(const SyntheticScene& scene);
// Several scenes in one bundle (image ids must be distinct); gt records only
// pair images of the same scene.
SceneBundle MergeBundles(const std::vector<SceneBundle>& bundles);

void WriteSceneBundle(const std::string& dir, const SceneBundle& bundle);
SceneBundle ReadSceneBundle(const std::string& dir);

nlohmann::json GtRecordToJson(const GtPairRecord& r);
GtPairRecord GtRecordFromJson(const nlohmann::json& j);
std::vector<GtPairRecord> ReadGtFile(const std::string& path);
void WriteGtFile(const std::string& path, const std::vector<GtPairRecord>& gt);

nlohmann::json HomographyToJson(const Homography& h);
Homography HomographyFromJson(const nlohmann::json& j);

}  // namespace comatcher
