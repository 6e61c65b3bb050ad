#include "comatcher/features/synthetic_scene.h"

#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "comatcher/core/error.h"

namespace comatcher {
namespace {

SceneConfig CleanConfig() {
  SceneConfig c;
  c.num_points = 40;
  c.num_sources = 4;
  c.descriptor_noise_sigma = 0.0;
  c.ambiguity_rate = 0.0;
  c.dropout_rate = 0.0;
  return c;
}

std::set<std::pair<int, int>> AsSet(const std::vector<std::pair<int, int>>& v) {
  return {v.begin(), v.end()};
}

TEST(GenerateScene, ShapeContract) {
  const SyntheticScene s = GenerateScene(1, CleanConfig());
  EXPECT_EQ(s.num_views(), 5);
  EXPECT_EQ(s.gt_pair_matches.size(), 10u);
  EXPECT_EQ(s.images[3].image_id, "v03");
  for (int v = 0; v < s.num_views(); ++v) {
    const ImageFeatures& f = s.images[v];
    EXPECT_EQ(f.width, 640.0);
    EXPECT_EQ(f.height, 480.0);
    EXPECT_EQ(f.descriptors.rows(), f.size());
    EXPECT_EQ(f.dim(), 64);
    std::set<int> labels(s.keypoint_labels[v].begin(),
                         s.keypoint_labels[v].end());
    EXPECT_EQ(labels.size(), s.keypoint_labels[v].size());
    for (int k = 0; k < f.size(); ++k) {
      EXPECT_NEAR(f.descriptors.row(k).norm(), 1.0, 1e-12);
      EXPECT_TRUE(s.visible[v][s.keypoint_labels[v][k]]);
    }
  }
}

TEST(GenerateScene, DeterministicForSeed) {
  SceneConfig c;
  c.ambiguity_rate = 0.3;
  c.dropout_rate = 0.2;
  const SyntheticScene a = GenerateScene(77, c);
  const SyntheticScene b = GenerateScene(77, c);
  for (int v = 0; v < a.num_views(); ++v) {
    EXPECT_EQ(FeaturesToJson(a.images[v]).dump(),
              FeaturesToJson(b.images[v]).dump());
  }
  const SyntheticScene other = GenerateScene(78, c);
  EXPECT_NE(FeaturesToJson(a.images[0]).dump(),
            FeaturesToJson(other.images[0]).dump());
}

TEST(GenerateScene, NearestNeighborRecoversCleanGt) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const SyntheticScene s = GenerateScene(seed, CleanConfig());
    for (const auto& [key, gt] : s.gt_pair_matches) {
      std::set<std::pair<int, int>> found;
      for (const auto& m : MutualNearestNeighbors(s.images[key.first],
                                                  s.images[key.second], 0.8)) {
        found.emplace(m.a, m.b);
      }
      EXPECT_EQ(found, AsSet(gt.matches)) << "seed " << seed;
    }
  }
}

TEST(GenerateScene, FullDropoutIsolatesView) {
  SceneConfig c = CleanConfig();
  c.view_dropout = {-1, -1, 1.0};
  const SyntheticScene s = GenerateScene(3, c);
  EXPECT_EQ(s.images[2].size(), 0);
  for (const auto& [key, gt] : s.gt_pair_matches) {
    if (key.first == 2 || key.second == 2) EXPECT_TRUE(gt.matches.empty());
  }
  EXPECT_GT(s.images[1].size(), 0);
}

TEST(GenerateScene, GtMatchesCompose) {
  SceneConfig c;
  c.dropout_rate = 0.3;
  const SyntheticScene s = GenerateScene(5, c);
  for (int a = 0; a < 5; ++a) {
    for (int b = a + 1; b < 5; ++b) {
      for (int d = b + 1; d < 5; ++d) {
        const auto ab = s.gt_pair_matches.at({a, b}).matches;
        const auto bd = s.gt_pair_matches.at({b, d}).matches;
        const auto ad = AsSet(s.gt_pair_matches.at({a, d}).matches);
        for (const auto& [u, x] : ab) {
          for (const auto& [x2, y] : bd) {
            if (x == x2) EXPECT_TRUE(ad.count({u, y}));
          }
        }
      }
    }
  }
}

TEST(GenerateScene, Errors) {
  SceneConfig c;
  c.num_points = 7;
  EXPECT_THROW(GenerateScene(0, c), Error);
  c.num_points = 20;
  c.num_sources = 0;
  EXPECT_THROW(GenerateScene(0, c), Error);
  c.num_sources = 2;
  c.height = 1e-9;  // every corner quad is numerically flat
  try {
    GenerateScene(0, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "degenerate-homography");
  }
}

TEST(GtLabels, NoiseFreeEqualsLabelGt) {
  SceneConfig c = CleanConfig();
  c.dropout_rate = 0.25;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const SyntheticScene s = GenerateScene(seed, c);
    for (const auto& [key, gt] : s.gt_pair_matches) {
      const GtLabels g = ComputeGtLabels(s, key.first, key.second);
      EXPECT_EQ(AsSet(g.matches), AsSet(gt.matches));
      EXPECT_EQ(g.unmatched_source, gt.unmatched_source);
      EXPECT_EQ(g.unmatched_target, gt.unmatched_target);
    }
  }
}

TEST(GtLabels, DeadZone) {
  SyntheticScene s = GenerateScene(4, CleanConfig());
  const auto [u, x] = s.gt_pair_matches.at({0, 1}).matches.front();
  PixelPoint& p = s.images[1].keypoints[x];
  p.x += (p.x > 320 ? -4.0 : 4.0);
  const GtLabels g = ComputeGtLabels(s, 0, 1);
  EXPECT_FALSE(AsSet(g.matches).count({u, x}));
  EXPECT_EQ(std::count(g.unmatched_source.begin(), g.unmatched_source.end(), u),
            0);
  EXPECT_EQ(std::count(g.unmatched_target.begin(), g.unmatched_target.end(), x),
            0);
}

TEST(GtLabels, BruteForceOracleAndSymmetry) {
  SceneConfig c;
  c.dropout_rate = 0.2;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    SyntheticScene s = GenerateScene(seed, c);
    // Jitter keypoints so all three classes occur.
    auto rng = std::mt19937_64(seed);
    for (auto& f : s.images) {
      for (auto& p : f.keypoints) {
        p.x = std::clamp(p.x + 3.0 * std::normal_distribution<>()(rng), 0.0, 640.0);
        p.y = std::clamp(p.y + 3.0 * std::normal_distribution<>()(rng), 0.0, 480.0);
      }
    }
    for (int i = 0; i < 5; ++i) {
      for (int t = 0; t < 5; ++t) {
        if (i == t) continue;
        const GtLabels g = ComputeGtLabels(s, i, t);
        const Homography h = s.homographies[t] * s.homographies[i].Inverse();
        std::set<std::pair<int, int>> ref;
        std::vector<int> un_i, un_t;
        const auto& a = s.images[i].keypoints;
        const auto& b = s.images[t].keypoints;
        for (size_t u = 0; u < a.size(); ++u) {
          bool near = false;
          for (size_t x = 0; x < b.size(); ++x) {
            const double e = SymmetricReprojectionError(h, a[u], b[x]);
            if (e <= 5.0) near = true;
            if (e <= 3.0 &&
                s.keypoint_labels[i][u] == s.keypoint_labels[t][x]) {
              ref.emplace(u, x);
            }
          }
          if (!near) un_i.push_back(static_cast<int>(u));
        }
        for (size_t x = 0; x < b.size(); ++x) {
          bool near = false;
          for (size_t u = 0; u < a.size(); ++u) {
            near |= SymmetricReprojectionError(h, a[u], b[x]) <= 5.0;
          }
          if (!near) un_t.push_back(static_cast<int>(x));
        }
        EXPECT_EQ(AsSet(g.matches), ref);
        EXPECT_EQ(g.unmatched_source, un_i);
        EXPECT_EQ(g.unmatched_target, un_t);
        const GtLabels back = ComputeGtLabels(s, t, i);
        EXPECT_EQ(AsSet(SwapGtLabels(back).matches), AsSet(g.matches));
        for (const auto& [u, x] : g.matches) {
          EXPECT_EQ(std::count(un_i.begin(), un_i.end(), u), 0);
        }
      }
    }
  }
}

}  // namespace
}  // namespace comatcher
