#include "comatcher/features/synthetic_scene.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "comatcher/core/error.h"
#include "comatcher/core/json_fields.h"
#include "comatcher/core/random.h"

namespace comatcher {
namespace {

enum Stream : uint64_t {
  kPlaneStream = 1,
  kQuadStream = 2,
  kEmbeddingStream = 3,
  kAmbiguityStream = 4,
  kDropoutStream = 5,
  kNoiseStream = 6,
  kShuffleStream = 7,
};

double Cross(const PixelPoint& o, const PixelPoint& a, const PixelPoint& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool IsStrictlyConvex(const std::array<PixelPoint, 4>& q) {
  int sign = 0;
  for (int k = 0; k < 4; ++k) {
    const double c = Cross(q[k], q[(k + 1) % 4], q[(k + 2) % 4]);
    if (std::abs(c) < 1e-6) return false;
    const int s = c > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) return false;
  }
  return true;
}

// Homography taking the quad to the frame corners (0,0) (w,0) (w,h) (0,h).
Homography QuadToFrame(const std::array<PixelPoint, 4>& quad, double w,
                       double h) {
  const std::array<PixelPoint, 4> frame = {
      PixelPoint{0, 0}, PixelPoint{w, 0}, PixelPoint{w, h}, PixelPoint{0, h}};
  std::vector<Correspondence> corr;
  for (int k = 0; k < 4; ++k) corr.push_back({quad[k], frame[k]});
  return DltHomography(corr);
}

Homography SampleViewHomography(std::mt19937_64& rng, const SceneConfig& cfg) {
  const double w = cfg.width;
  const double h = cfg.height;
  const double jx = cfg.corner_jitter * w / 2.0;
  const double jy = cfg.corner_jitter * h / 2.0;
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::array<PixelPoint, 4> q;
    q[0] = {UniformReal(rng, 0.0, jx), UniformReal(rng, 0.0, jy)};
    q[1] = {w - UniformReal(rng, 0.0, jx), UniformReal(rng, 0.0, jy)};
    q[2] = {w - UniformReal(rng, 0.0, jx), h - UniformReal(rng, 0.0, jy)};
    q[3] = {UniformReal(rng, 0.0, jx), h - UniformReal(rng, 0.0, jy)};
    if (!IsStrictlyConvex(q)) continue;
    try {
      return QuadToFrame(q, w, h);
    } catch (const Error&) {
    }
  }
  throw DataError("degenerate-homography",
                  "no convex corner quad in 100 attempts");
}

// Visible iff the point lies on the camera side of the horizon and projects
// inside the frame.
std::optional<PixelPoint> Project(const Homography& h, const PixelPoint& p,
                                  double front_sign, double w, double hgt) {
  const Eigen::Vector3d x = h.matrix() * Eigen::Vector3d(p.x, p.y, 1.0);
  if (x.z() * front_sign <= 1e-9) return std::nullopt;
  const PixelPoint q{x.x() / x.z(), x.y() / x.z()};
  if (q.x < 0.0 || q.y < 0.0 || q.x > w || q.y > hgt) return std::nullopt;
  return q;
}

std::string ViewId(const std::string& prefix, int view) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d", view);
  return prefix + buf;
}

}  // namespace

Homography SyntheticScene::Between(int i, int t) const {
  return homographies.at(t) * homographies.at(i).Inverse();
}

SyntheticScene GenerateScene(uint64_t seed, const SceneConfig& cfg) {
  if (cfg.num_points < 8) {
    throw Error("invalid-config", "num_points must be >= 8", ErrorKind::kUsage);
  }
  if (cfg.num_sources < 1) {
    throw Error("invalid-config", "M must be >= 1", ErrorKind::kUsage);
  }
  if (cfg.descriptor_dim < 1 || !(cfg.width > 0) || !(cfg.height > 0)) {
    throw Error("invalid-config", "bad frame or descriptor size",
                ErrorKind::kUsage);
  }
  SyntheticScene scene;
  scene.config = cfg;
  scene.seed = seed;
  const int num_views = cfg.num_sources + 1;
  const int n = cfg.num_points;
  const int d = cfg.descriptor_dim;

  {
    auto rng = MakeRng(seed, kPlaneStream);
    const double min_sq = cfg.min_separation * cfg.min_separation;
    const int max_tries = 1000 * n;
    int tries = 0;
    while (static_cast<int>(scene.world_points.size()) < n) {
      const PixelPoint p{UniformReal(rng, 0.0, cfg.width),
                         UniformReal(rng, 0.0, cfg.height)};
      bool ok = true;
      if (tries++ < max_tries) {
        for (const auto& q : scene.world_points) {
          const double dx = p.x - q.x;
          const double dy = p.y - q.y;
          if (dx * dx + dy * dy < min_sq) {
            ok = false;
            break;
          }
        }
      }
      if (ok) scene.world_points.push_back(p);
    }
  }

  {
    auto rng = MakeRng(seed, kQuadStream);
    for (int v = 0; v < num_views; ++v) {
      scene.homographies.push_back(SampleViewHomography(rng, cfg));
    }
  }

  Tensor2 embedding(n, d);
  {
    auto rng = MakeRng(seed, kEmbeddingStream);
    for (int l = 0; l < n; ++l) {
      for (int c = 0; c < d; ++c) {
        embedding(l, c) = static_cast<Scalar>(StandardNormal(rng));
      }
      embedding.row(l).normalize();
    }
  }
  if (cfg.ambiguity_rate > 0.0 && n > 1) {
    auto rng = MakeRng(seed, kAmbiguityStream);
    const Tensor2 base = embedding;
    for (int l = 0; l < n; ++l) {
      if (UniformReal(rng, 0.0, 1.0) < cfg.ambiguity_rate) {
        int other = UniformInt(rng, 0, n - 2);
        if (other >= l) ++other;
        embedding.row(l) = base.row(other);
      }
    }
  }

  auto dropout_rng = MakeRng(seed, kDropoutStream);
  auto noise_rng = MakeRng(seed, kNoiseStream);
  auto shuffle_rng = MakeRng(seed, kShuffleStream);
  const Eigen::Vector3d center(cfg.width / 2.0, cfg.height / 2.0, 1.0);
  for (int v = 0; v < num_views; ++v) {
    const Homography& h = scene.homographies[v];
    const double front = (h.matrix() * center).z() > 0 ? 1.0 : -1.0;
    double rate = cfg.dropout_rate;
    if (v < static_cast<int>(cfg.view_dropout.size()) &&
        cfg.view_dropout[v] >= 0.0) {
      rate = cfg.view_dropout[v];
    }
    std::vector<char> vis(n, 0);
    std::vector<PixelPoint> projected(n);
    for (int l = 0; l < n; ++l) {
      const auto q = Project(h, scene.world_points[l], front, cfg.width,
                             cfg.height);
      if (!q) continue;
      // Always draw so the other views do not depend on this one's rate.
      const double u = UniformReal(dropout_rng, 0.0, 1.0);
      if (u < rate) continue;
      vis[l] = 1;
      projected[l] = *q;
    }
    std::vector<int> labels;
    for (int l = 0; l < n; ++l) {
      if (vis[l]) labels.push_back(l);
    }
    std::shuffle(labels.begin(), labels.end(), shuffle_rng);

    ImageFeatures f;
    f.image_id = ViewId(cfg.id_prefix, v);
    f.width = cfg.width;
    f.height = cfg.height;
    f.descriptors.resize(static_cast<Eigen::Index>(labels.size()), d);
    for (size_t k = 0; k < labels.size(); ++k) {
      const int l = labels[k];
      f.keypoints.push_back(projected[l]);
      for (int c = 0; c < d; ++c) {
        f.descriptors(k, c) =
            embedding(l, c) + static_cast<Scalar>(cfg.descriptor_noise_sigma *
                                                  StandardNormal(noise_rng));
      }
      const Scalar norm = f.descriptors.row(k).norm();
      if (norm > 0) f.descriptors.row(k) /= norm;
    }
    scene.images.push_back(std::move(f));
    scene.keypoint_labels.push_back(std::move(labels));
    scene.visible.push_back(std::move(vis));
  }

  for (int i = 0; i < num_views; ++i) {
    for (int t = i + 1; t < num_views; ++t) {
      GtLabels g;
      std::vector<int> in_t(n, -1);
      for (size_t x = 0; x < scene.keypoint_labels[t].size(); ++x) {
        in_t[scene.keypoint_labels[t][x]] = static_cast<int>(x);
      }
      std::vector<char> t_used(scene.keypoint_labels[t].size(), 0);
      for (size_t u = 0; u < scene.keypoint_labels[i].size(); ++u) {
        const int x = in_t[scene.keypoint_labels[i][u]];
        if (x >= 0) {
          g.matches.emplace_back(static_cast<int>(u), x);
          t_used[x] = 1;
        } else {
          g.unmatched_source.push_back(static_cast<int>(u));
        }
      }
      for (size_t x = 0; x < t_used.size(); ++x) {
        if (!t_used[x]) g.unmatched_target.push_back(static_cast<int>(x));
      }
      scene.gt_pair_matches[{i, t}] = std::move(g);
    }
  }
  return scene;
}

GtLabels ComputeGtLabels(const ImageFeatures& a, const std::vector<int>& la,
                         const ImageFeatures& b, const std::vector<int>& lb,
                         const Homography& a_to_b, double inlier_px,
                         double outlier_px) {
  const Homography b_to_a = a_to_b.Inverse();
  const int na = a.size();
  const int nb = b.size();
  std::vector<std::optional<PixelPoint>> fwd(na), bwd(nb);
  for (int u = 0; u < na; ++u) fwd[u] = TryApplyHomography(a_to_b, a.keypoints[u]);
  for (int x = 0; x < nb; ++x) bwd[x] = TryApplyHomography(b_to_a, b.keypoints[x]);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto error = [&](int u, int x) {
    if (!fwd[u] || !bwd[x]) return kInf;
    return 0.5 * (Distance(*fwd[u], b.keypoints[x]) +
                  Distance(*bwd[x], a.keypoints[u]));
  };

  GtLabels g;
  std::vector<double> min_a(na, kInf), min_b(nb, kInf);
  for (int u = 0; u < na; ++u) {
    for (int x = 0; x < nb; ++x) {
      const double e = error(u, x);
      min_a[u] = std::min(min_a[u], e);
      min_b[x] = std::min(min_b[x], e);
      if (la[u] >= 0 && la[u] == lb[x] && e <= inlier_px) {
        g.matches.emplace_back(u, x);
      }
    }
  }
  for (int u = 0; u < na; ++u) {
    if (min_a[u] > outlier_px) g.unmatched_source.push_back(u);
  }
  for (int x = 0; x < nb; ++x) {
    if (min_b[x] > outlier_px) g.unmatched_target.push_back(x);
  }
  return g;
}

GtLabels ComputeGtLabels(const SyntheticScene& scene, int i, int t,
                         double inlier_px, double outlier_px) {
  if (i == t || i < 0 || t < 0 || i >= scene.num_views() ||
      t >= scene.num_views()) {
    throw Error("invalid-pair", std::to_string(i) + "," + std::to_string(t),
                ErrorKind::kUsage);
  }
  return ComputeGtLabels(scene.images[i], scene.keypoint_labels[i],
                         scene.images[t], scene.keypoint_labels[t],
                         scene.Between(i, t), inlier_px, outlier_px);
}

GtLabels SwapGtLabels(const GtLabels& labels) {
  GtLabels out;
  for (const auto& [u, x] : labels.matches) out.matches.emplace_back(x, u);
  std::sort(out.matches.begin(), out.matches.end());
  out.unmatched_source = labels.unmatched_target;
  out.unmatched_target = labels.unmatched_source;
  return out;
}

nlohmann::json SceneConfigToJson(const SceneConfig& c) {
  return {{"num_points", c.num_points},
          {"num_sources", c.num_sources},
          {"width", c.width},
          {"height", c.height},
          {"corner_jitter", c.corner_jitter},
          {"descriptor_dim", c.descriptor_dim},
          {"descriptor_noise_sigma", c.descriptor_noise_sigma},
          {"ambiguity_rate", c.ambiguity_rate},
          {"dropout_rate", c.dropout_rate},
          {"view_dropout", c.view_dropout},
          {"min_separation", c.min_separation},
          {"id_prefix", c.id_prefix}};
}

SceneConfig SceneConfigFromJson(const nlohmann::json& j, SceneConfig c,
                                const std::string& scope) {
  JsonFields f(j, scope);
  f.Get("num_points", &c.num_points);
  f.Get("num_sources", &c.num_sources);
  f.Get("width", &c.width);
  f.Get("height", &c.height);
  f.Get("corner_jitter", &c.corner_jitter);
  f.Get("descriptor_dim", &c.descriptor_dim);
  f.Get("descriptor_noise_sigma", &c.descriptor_noise_sigma);
  f.Get("ambiguity_rate", &c.ambiguity_rate);
  f.Get("dropout_rate", &c.dropout_rate);
  f.Get("view_dropout", &c.view_dropout);
  f.Get("min_separation", &c.min_separation);
  f.Get("id_prefix", &c.id_prefix);
  f.Finish();
  return c;
}

}  // namespace comatcher
