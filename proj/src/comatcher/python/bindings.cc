#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "comatcher/cli/commands.h"
#include "comatcher/core/error.h"
#include "comatcher/features/synthetic_scene.h"
#include "comatcher/geometry/homography.h"
#include "comatcher/grouping/group_images.h"
#include "comatcher/match/match_head.h"

namespace py = pybind11;

namespace comatcher {
namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

std::vector<PixelPoint> ToPoints(const Points& m) {
  std::vector<PixelPoint> out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back({m(r, 0), m(r, 1)});
  return out;
}

Points FromPoints(const std::vector<PixelPoint>& pts) {
  Points m(pts.size(), 2);
  for (size_t r = 0; r < pts.size(); ++r) m.row(r) << pts[r].x, pts[r].y;
  return m;
}

py::list MatchList(const MatchSet& set) {
  py::list out;
  for (const auto& m : set.pairs) out.append(py::make_tuple(m.u, m.x, m.score));
  return out;
}

py::dict Scene(uint64_t seed, const std::string& config_json) {
  const SceneConfig cfg = SceneConfigFromJson(
      config_json.empty() ? nlohmann::json::object()
                          : nlohmann::json::parse(config_json));
  const SyntheticScene scene = GenerateScene(seed, cfg);
  py::list images;
  for (int v = 0; v < scene.num_views(); ++v) {
    const ImageFeatures& f = scene.images[v];
    py::dict d;
    d["image_id"] = f.image_id;
    d["width"] = f.width;
    d["height"] = f.height;
    d["keypoints"] = FromPoints(f.keypoints);
    d["descriptors"] = Eigen::MatrixXd(f.descriptors.cast<double>());
    d["labels"] = scene.keypoint_labels[v];
    images.append(d);
  }
  py::list between;
  for (int v = 0; v < scene.num_views(); ++v) {
    between.append(Eigen::Matrix3d(scene.Between(v, scene.num_views() - 1).matrix()));
  }
  py::dict out;
  out["seed"] = seed;
  out["images"] = images;
  out["to_target"] = between;
  return out;
}

py::tuple Ransac(const Points& source, const Points& target, double threshold,
                 int max_iterations, uint64_t seed) {
  if (source.rows() != target.rows()) {
    throw Error("shape-mismatch", "source and target point counts differ");
  }
  std::vector<Correspondence> c;
  for (Eigen::Index r = 0; r < source.rows(); ++r) {
    c.push_back({{source(r, 0), source(r, 1)}, {target(r, 0), target(r, 1)}});
  }
  RansacOptions opt;
  opt.inlier_threshold_px = threshold;
  opt.max_iterations = max_iterations;
  opt.seed = seed;
  const RansacResult r = RansacHomography(c, opt);
  std::vector<bool> mask(r.inlier_mask.begin(), r.inlier_mask.end());
  return py::make_tuple(Eigen::Matrix3d(r.model.matrix()), mask);
}

std::vector<std::vector<int>> GroupMatrix(const Eigen::MatrixXd& weights,
                                    double theta_min, double theta_max,
                                    int max_size) {
  std::vector<std::string> ids;
  for (Eigen::Index k = 0; k < weights.rows(); ++k) {
    ids.push_back(std::to_string(k));
  }
  GroupingOptions opt{theta_min, theta_max, max_size};
  std::vector<std::vector<int>> out;
  for (const auto& g : GroupImages(OverlapGraph(ids, weights), opt)) {
    out.push_back(g.members);
  }
  return out;
}

}  // namespace
}  // namespace comatcher

PYBIND11_MODULE(_core, m) {
  using namespace comatcher;
  m.doc() = "Multi-view collaborative feature matching.";

  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  m.def("version", &VersionString);
  m.def("run", [](const std::vector<std::string>& args) {
    py::gil_scoped_release release;
    return Dispatch(args);
  }, py::arg("args"), "Runs a command line; returns the exit code.");

  m.def("generate_scene", &Scene, py::arg("seed"),
        py::arg("config_json") = "");
  m.def("dual_softmax", [](const Tensor2& s) { return DualSoftmaxValues(s); },
        py::arg("scores"));
  m.def("assignment",
        [](const Tensor2& dual, const VectorX& ss, const VectorX& st) {
          return AssignmentValues(dual, ss, st);
        },
        py::arg("dual"), py::arg("sigma_source"), py::arg("sigma_target"));
  m.def("filter_matches",
        [](const Tensor2& p, double t) { return MatchList(FilterMatches(p, t)); },
        py::arg("assignment"), py::arg("threshold"));
  m.def("ransac_homography", &Ransac, py::arg("source"), py::arg("target"),
        py::arg("threshold") = 3.0, py::arg("max_iterations") = 1000,
        py::arg("seed") = 0);
  m.def("corner_error",
        [](const Eigen::Matrix3d& est, const Eigen::Matrix3d& truth, double w,
           double h) {
          return CornerError(Homography::FromMatrix(est),
                             Homography::FromMatrix(truth), w, h);
        },
        py::arg("estimate"), py::arg("truth"), py::arg("width"),
        py::arg("height"));
  m.def("group_images", &GroupMatrix, py::arg("weights"), py::arg("theta_min") = 0.3,
        py::arg("theta_max") = 0.7, py::arg("max_size") = 4);
}
