#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "comatcher/core/tensor.h"
#include "comatcher/geometry/homography.h"

namespace comatcher {

// Keypoints and their descriptors for one image.
struct ImageFeatures {
  std::string image_id;
  double width = 0.0;
  double height = 0.0;
  std::vector<PixelPoint> keypoints;
  Tensor2 descriptors;  // keypoints.size() x dim

  int size() const { return static_cast<int>(keypoints.size()); }
  Eigen::Index dim() const { return descriptors.cols(); }
};

// Enforces the invariants: one descriptor row per keypoint, keypoints inside
// [0, width] x [0, height], finite values, and unit-norm descriptor rows (rows
// off by more than 1e-6 are renormalized). Throws Error on violations.
void ValidateFeatures(ImageFeatures* features);

// Mutual nearest neighbours on descriptor cosine similarity with similarity
// strictly above `min_similarity`. Ties go to the smaller index. Returns
// (index in a, index in b, similarity) triples sorted by index in a.
struct DescriptorMatch {
  int a = 0;
  int b = 0;
  double similarity = 0.0;
};
std::vector<DescriptorMatch> MutualNearestNeighbors(const ImageFeatures& a,
                                                    const ImageFeatures& b,
                                                    double min_similarity);

nlohmann::json FeaturesToJson(const ImageFeatures& features);
ImageFeatures FeaturesFromJson(const nlohmann::json& j);

// JSON lines, one image per line:
// {image_id, width, height, keypoints: [[x, y], ...], descriptors: [[...]]}.
void WriteFeaturesFile(const std::string& path,
                       const std::vector<ImageFeatures>& images);
std::vector<ImageFeatures> ReadFeaturesFile(const std::string& path);

// Shared JSON-lines helpers.
std::vector<nlohmann::json> ReadJsonLines(const std::string& path);
void WriteJsonLines(const std::string& path,
                    const std::vector<nlohmann::json>& lines);
nlohmann::json ReadJsonFile(const std::string& path);
void WriteJsonFile(const std::string& path, const nlohmann::json& j);

}  // namespace comatcher
