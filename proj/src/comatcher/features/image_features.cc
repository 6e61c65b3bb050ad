#include "comatcher/features/image_features.h"

#include <cmath>
#include <fstream>

#include "comatcher/core/error.h"

namespace comatcher {

void ValidateFeatures(ImageFeatures* f) {
  if (f->descriptors.rows() != f->size()) {
    throw DataError("shape-mismatch", f->image_id + ": " +
                                          std::to_string(f->size()) +
                                          " keypoints but " +
                                          std::to_string(f->descriptors.rows()) +
                                          " descriptors");
  }
  if (!(f->width > 0.0) || !(f->height > 0.0)) {
    throw DataError("invalid-image-size", f->image_id);
  }
  for (const PixelPoint& p : f->keypoints) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0.0 ||
        p.y < 0.0 || p.x > f->width || p.y > f->height) {
      throw DataError("keypoint-out-of-frame", f->image_id);
    }
  }
  if (!f->descriptors.allFinite()) {
    throw DataError("nonfinite-descriptor", f->image_id);
  }
  for (Eigen::Index r = 0; r < f->descriptors.rows(); ++r) {
    const double norm = static_cast<double>(f->descriptors.row(r).norm());
    if (std::abs(norm - 1.0) > 1e-6) {
      if (!(norm > 0.0)) {
        throw DataError("zero-descriptor", f->image_id);
      }
      f->descriptors.row(r) /= static_cast<Scalar>(norm);
    }
  }
}

std::vector<DescriptorMatch> MutualNearestNeighbors(const ImageFeatures& a,
                                                    const ImageFeatures& b,
                                                    double min_similarity) {
  std::vector<DescriptorMatch> out;
  if (a.size() == 0 || b.size() == 0) return out;
  if (a.dim() != b.dim()) {
    throw Error("shape-mismatch", "descriptor dims differ");
  }
  const Tensor2 sim = a.descriptors * b.descriptors.transpose();
  std::vector<int> best_b(sim.rows());
  std::vector<int> best_a(sim.cols());
  for (Eigen::Index r = 0; r < sim.rows(); ++r) {
    sim.row(r).maxCoeff(&best_b[r]);
  }
  for (Eigen::Index c = 0; c < sim.cols(); ++c) {
    sim.col(c).maxCoeff(&best_a[c]);
  }
  for (int r = 0; r < sim.rows(); ++r) {
    const int c = best_b[r];
    if (best_a[c] == r && sim(r, c) > min_similarity) {
      out.push_back({r, c, static_cast<double>(sim(r, c))});
    }
  }
  return out;
}

nlohmann::json FeaturesToJson(const ImageFeatures& f) {
  nlohmann::json keypoints = nlohmann::json::array();
  for (const auto& p : f.keypoints) keypoints.push_back({p.x, p.y});
  nlohmann::json descriptors = nlohmann::json::array();
  for (Eigen::Index r = 0; r < f.descriptors.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < f.descriptors.cols(); ++c) {
      row.push_back(static_cast<double>(f.descriptors(r, c)));
    }
    descriptors.push_back(std::move(row));
  }
  return {{"image_id", f.image_id},
          {"width", f.width},
          {"height", f.height},
          {"keypoints", std::move(keypoints)},
          {"descriptors", std::move(descriptors)}};
}

ImageFeatures FeaturesFromJson(const nlohmann::json& j) {
  ImageFeatures f;
  try {
    f.image_id = j.at("image_id").get<std::string>();
    f.width = j.at("width").get<double>();
    f.height = j.at("height").get<double>();
    for (const auto& kp : j.at("keypoints")) {
      if (kp.size() != 2) throw DataError("malformed-keypoint", f.image_id);
      f.keypoints.push_back({kp[0].get<double>(), kp[1].get<double>()});
    }
    const auto& desc = j.at("descriptors");
    const Eigen::Index rows = static_cast<Eigen::Index>(desc.size());
    const Eigen::Index cols =
        rows > 0 ? static_cast<Eigen::Index>(desc[0].size()) : 0;
    f.descriptors.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (static_cast<Eigen::Index>(desc[r].size()) != cols) {
        throw DataError("shape-mismatch", f.image_id + ": ragged descriptors");
      }
      for (Eigen::Index c = 0; c < cols; ++c) {
        f.descriptors(r, c) = static_cast<Scalar>(desc[r][c].get<double>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed-features", e.what());
  }
  ValidateFeatures(&f);
  return f;
}

std::vector<nlohmann::json> ReadJsonLines(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw DataError("io-error", "cannot read " + path);
  std::vector<nlohmann::json> lines;
  std::string line;
  while (std::getline(file, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      lines.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed-json", path + ": " + e.what());
    }
  }
  return lines;
}

void WriteJsonLines(const std::string& path,
                    const std::vector<nlohmann::json>& lines) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw DataError("io-error", "cannot write " + path);
  for (const auto& j : lines) file << j.dump() << '\n';
  if (!file) throw DataError("io-error", "failed writing " + path);
}

nlohmann::json ReadJsonFile(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw DataError("io-error", "cannot read " + path);
  try {
    return nlohmann::json::parse(file);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed-json", path + ": " + e.what());
  }
}

void WriteJsonFile(const std::string& path, const nlohmann::json& j) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw DataError("io-error", "cannot write " + path);
  file << j.dump(2) << '\n';
  if (!file) throw DataError("io-error", "failed writing " + path);
}

void WriteFeaturesFile(const std::string& path,
                       const std::vector<ImageFeatures>& images) {
  std::vector<nlohmann::json> lines;
  lines.reserve(images.size());
  for (const auto& f : images) lines.push_back(FeaturesToJson(f));
  WriteJsonLines(path, lines);
}

std::vector<ImageFeatures> ReadFeaturesFile(const std::string& path) {
  std::vector<ImageFeatures> images;
  for (const auto& j : ReadJsonLines(path)) {
    images.push_back(FeaturesFromJson(j));
  }
  return images;
}

}  // namespace comatcher
