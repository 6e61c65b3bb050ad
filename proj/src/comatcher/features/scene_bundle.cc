#include "comatcher/features/scene_bundle.h"

#include <filesystem>
#include <set>

#include "comatcher/core/error.h"

namespace comatcher {

int SceneBundle::IndexOf(const std::string& image_id) const {
  for (size_t k = 0; k < images.size(); ++k) {
    if (images[k].image_id == image_id) return static_cast<int>(k);
  }
  return -1;
}

GtLabels SceneBundle::Labels(const std::string& i, const std::string& t) const {
  for (const auto& r : gt) {
    if (r.i == i && r.t == t) return r.labels;
    if (r.i == t && r.t == i) return SwapGtLabels(r.labels);
  }
  throw DataError("missing-gt", i + " / " + t);
}

SceneBundle BundleFromScene(const SyntheticScene& scene) {
  SceneBundle b;
  b.images = scene.images;
  for (int v = 0; v < scene.num_views(); ++v) {
    const std::string& id = scene.images[v].image_id;
    b.homographies[id] = scene.homographies[v];
    b.labels[id] = scene.keypoint_labels[v];
  }
  for (int i = 0; i < scene.num_views(); ++i) {
    for (int t = i + 1; t < scene.num_views(); ++t) {
      b.gt.push_back({scene.images[i].image_id, scene.images[t].image_id,
                      ComputeGtLabels(scene, i, t)});
    }
  }
  return b;
}

SceneBundle MergeBundles(const std::vector<SceneBundle>& bundles) {
  SceneBundle out;
  std::set<std::string> ids;
  for (const auto& b : bundles) {
    for (const auto& f : b.images) {
      if (!ids.insert(f.image_id).second) {
        throw DataError("duplicate-image-id", f.image_id);
      }
      out.images.push_back(f);
    }
    out.homographies.insert(b.homographies.begin(), b.homographies.end());
    out.labels.insert(b.labels.begin(), b.labels.end());
    out.gt.insert(out.gt.end(), b.gt.begin(), b.gt.end());
  }
  return out;
}

nlohmann::json HomographyToJson(const Homography& h) {
  nlohmann::json a = nlohmann::json::array();
  for (double v : h.ToArray()) a.push_back(v);
  return a;
}

Homography HomographyFromJson(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 9) {
    throw DataError("malformed-homography", j.dump());
  }
  std::array<double, 9> a;
  for (int k = 0; k < 9; ++k) a[k] = j[k].get<double>();
  return Homography::FromArray(a);
}

namespace {

nlohmann::json IndexList(const std::vector<int>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (int x : v) a.push_back(x);
  return a;
}

}  // namespace

nlohmann::json GtRecordToJson(const GtPairRecord& r) {
  nlohmann::json m = nlohmann::json::array();
  for (const auto& [u, x] : r.labels.matches) m.push_back({u, x});
  return {{"i", r.i},
          {"t", r.t},
          {"matches", std::move(m)},
          {"unmatched_i", IndexList(r.labels.unmatched_source)},
          {"unmatched_t", IndexList(r.labels.unmatched_target)}};
}

GtPairRecord GtRecordFromJson(const nlohmann::json& j) {
  GtPairRecord r;
  try {
    r.i = j.at("i").get<std::string>();
    r.t = j.at("t").get<std::string>();
    for (const auto& m : j.at("matches")) {
      r.labels.matches.emplace_back(m.at(0).get<int>(), m.at(1).get<int>());
    }
    r.labels.unmatched_source = j.at("unmatched_i").get<std::vector<int>>();
    r.labels.unmatched_target = j.at("unmatched_t").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed-gt", e.what());
  }
  return r;
}

std::vector<GtPairRecord> ReadGtFile(const std::string& path) {
  std::vector<GtPairRecord> out;
  for (const auto& j : ReadJsonLines(path)) out.push_back(GtRecordFromJson(j));
  return out;
}

void WriteGtFile(const std::string& path, const std::vector<GtPairRecord>& gt) {
  std::vector<nlohmann::json> lines;
  for (const auto& r : gt) lines.push_back(GtRecordToJson(r));
  WriteJsonLines(path, lines);
}

void WriteSceneBundle(const std::string& dir, const SceneBundle& b) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("io-error", "cannot create " + dir);
  const fs::path root(dir);
  WriteFeaturesFile((root / "features.jsonl").string(), b.images);
  nlohmann::json hom = nlohmann::json::object();
  for (const auto& [id, h] : b.homographies) hom[id] = HomographyToJson(h);
  WriteJsonFile((root / "homographies.json").string(), hom);
  WriteGtFile((root / "gt_matches.jsonl").string(), b.gt);
  nlohmann::json labels = nlohmann::json::object();
  for (const auto& [id, l] : b.labels) labels[id] = IndexList(l);
  WriteJsonFile((root / "labels.json").string(), labels);
}

SceneBundle ReadSceneBundle(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  SceneBundle b;
  b.images = ReadFeaturesFile((root / "features.jsonl").string());
  if (fs::exists(root / "homographies.json")) {
    const auto hom = ReadJsonFile((root / "homographies.json").string());
    for (const auto& [id, h] : hom.items()) {
      b.homographies[id] = HomographyFromJson(h);
    }
  }
  if (fs::exists(root / "gt_matches.jsonl")) {
    b.gt = ReadGtFile((root / "gt_matches.jsonl").string());
  }
  if (fs::exists(root / "labels.json")) {
    const auto labels = ReadJsonFile((root / "labels.json").string());
    for (const auto& [id, l] : labels.items()) {
      b.labels[id] = l.get<std::vector<int>>();
    }
  }
  for (const auto& f : b.images) {
    auto it = b.labels.find(f.image_id);
    if (it != b.labels.end() && static_cast<int>(it->second.size()) != f.size()) {
      throw DataError("shape-mismatch", "labels for " + f.image_id);
    }
  }
  return b;
}

}  // namespace comatcher
