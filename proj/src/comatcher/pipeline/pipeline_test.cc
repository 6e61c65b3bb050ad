#include "comatcher/pipeline/pipeline.h"

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "comatcher/core/error.h"
#include "comatcher/core/random.h"
#include "comatcher/eval/metrics.h"
#include "comatcher/eval/track_eval.h"
#include "comatcher/features/scene_bundle.h"
#include "comatcher/pipeline/connect.h"
#include "comatcher/pipeline/group_matcher.h"
#include "comatcher/pipeline/verify.h"

namespace comatcher {
namespace {

PairMatches Pair(const std::string& a, const std::string& b,
                 std::vector<std::pair<int, int>> ux) {
  PairMatches p{a, b, {}};
  for (const auto& [u, x] : ux) p.matches.pairs.push_back({u, x, 1.0});
  return p;
}

TEST(MergeTracks, ChainBecomesOneTrack) {
  const auto tracks =
      MergeTracks({Pair("A", "B", {{1, 2}}), Pair("B", "C", {{2, 7}})});
  ASSERT_EQ(tracks.size(), 1u);
  EXPECT_EQ(tracks[0].entries,
            (std::vector<std::pair<std::string, int>>{{"A", 1}, {"B", 2}, {"C", 7}}));
}

TEST(MergeTracks, ConflictingComponentIsDiscarded) {
  const auto tracks = MergeTracks(
      {Pair("A", "B", {{1, 5}, {1, 6}, {3, 3}}), Pair("A", "C", {{3, 0}})});
  ASSERT_EQ(tracks.size(), 1u);
  EXPECT_EQ(tracks[0].entries.front(), (std::pair<std::string, int>{"A", 3}));
}

TEST(MergeTracks, SortedPartitionAndIdempotent) {
  std::mt19937_64 rng(3);
  std::vector<PairMatches> all;
  const std::vector<std::string> ids = {"a", "b", "c", "d", "e"};
  for (size_t i = 0; i < ids.size(); ++i) {
    for (size_t j = i + 1; j < ids.size(); ++j) {
      std::vector<std::pair<int, int>> ux;
      for (int k = 0; k < 12; ++k) {
        ux.emplace_back(UniformInt(rng, 0, 19), UniformInt(rng, 0, 19));
      }
      all.push_back(Pair(ids[i], ids[j], ux));
    }
  }
  const auto tracks = MergeTracks(all);
  std::set<std::pair<std::string, int>> seen;
  for (size_t k = 0; k < tracks.size(); ++k) {
    EXPECT_GE(tracks[k].entries.size(), 2u);
    for (const auto& e : tracks[k].entries) EXPECT_TRUE(seen.insert(e).second);
    if (k > 0) EXPECT_LT(tracks[k - 1].entries.front(), tracks[k].entries.front());
  }
  EXPECT_EQ(MergeTracks(TrackPairMatches(tracks)), tracks);
}

TEST(TracksFile, RoundTrip) {
  const auto tracks =
      MergeTracks({Pair("A", "B", {{1, 2}, {4, 0}}), Pair("B", "C", {{2, 7}})});
  const std::string path = ::testing::TempDir() + "tracks_test.jsonl";
  WriteTracksFile(path, tracks);
  EXPECT_EQ(ReadTracksFile(path), tracks);
}

std::vector<Correspondence> Planar(std::mt19937_64& rng, const Homography& h,
                                   int n) {
  std::vector<Correspondence> c;
  for (int k = 0; k < n; ++k) {
    const PixelPoint p{UniformReal(rng, 0, 640), UniformReal(rng, 0, 480)};
    c.push_back({p, ApplyHomography(h, p)});
  }
  return c;
}

struct VerifyCase {
  ImageFeatures a, b;
  MatchSet set;
};

VerifyCase MakeVerifyCase(uint64_t seed, int n, double outlier_rate) {
  auto rng = MakeRng(seed);
  Eigen::Matrix3d m;
  m << 1.1, 0.05, 12, -0.03, 0.95, -7, 1e-5, 2e-5, 1;
  const Homography h = Homography::FromMatrix(m);
  VerifyCase c;
  c.a.image_id = "a";
  c.b.image_id = "b";
  for (const auto& k : Planar(rng, h, n)) {
    c.a.keypoints.push_back(k.source);
    PixelPoint q = k.target;
    if (UniformReal(rng, 0, 1) < outlier_rate) {
      q = {UniformReal(rng, 0, 640), UniformReal(rng, 0, 480)};
    }
    c.b.keypoints.push_back(q);
  }
  for (int k = 0; k < n; ++k) c.set.pairs.push_back({k, k, 0.9});
  return c;
}

TEST(GeometricVerify, AllInliersUnchanged) {
  const VerifyCase c = MakeVerifyCase(1, 30, 0.0);
  const MatchSet v = GeometricVerify(c.set, c.a, c.b);
  EXPECT_EQ(v.pairs.size(), 30u);
  EXPECT_FALSE(v.unverified);
  EXPECT_TRUE(v.unmatched_source.empty());
}

TEST(GeometricVerify, RemovesInjectedOutliers) {
  int clean = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    VerifyCase c = MakeVerifyCase(seed, 40, 0.0);
    auto rng = MakeRng(seed, 99);
    std::set<int> outliers;
    while (outliers.size() < 12) outliers.insert(UniformInt(rng, 0, 39));
    for (int k : outliers) {
      c.b.keypoints[k] = c.b.keypoints[k] + PixelPoint{40 + UniformReal(rng, 0, 80), -35};
    }
    const MatchSet v = GeometricVerify(c.set, c.a, c.b, 3.0, seed);
    bool ok = v.pairs.size() == 28u;
    for (const auto& m : v.pairs) ok = ok && !outliers.count(m.u);
    clean += ok;
  }
  EXPECT_GE(clean, 95);
}

TEST(GeometricVerify, FewMatchesFlagged) {
  const VerifyCase c = MakeVerifyCase(2, 3, 0.0);
  const MatchSet v = GeometricVerify(c.set, c.a, c.b);
  EXPECT_TRUE(v.unverified);
  EXPECT_EQ(v.pairs.size(), 3u);
}

SceneConfig EasyScene(int sources) {
  SceneConfig sc;
  sc.num_sources = sources;
  sc.descriptor_noise_sigma = 0.0;
  return sc;
}

ImageLabels LabelsOf(const SyntheticScene& s) {
  ImageLabels l;
  for (int v = 0; v < s.num_views(); ++v) l[s.images[v].image_id] = s.keypoint_labels[v];
  return l;
}

TEST(ConnectGroup, NoiseFreeGroupMatchesGroundTruth) {
  const SyntheticScene scene = GenerateScene(5, EasyScene(3));
  std::vector<const ImageFeatures*> views;
  for (const auto& f : scene.images) views.push_back(&f);
  const GroupTracks tracks = ConnectGroup(views);
  const auto gt = GroundTruthTracks(scene.images, LabelsOf(scene));
  ASSERT_EQ(static_cast<size_t>(tracks.tracks().size()), gt.size());
  for (const auto& t : gt) {
    const int v0 = scene.images.front().image_id == t.entries[0].first ? 0 : -1;
    if (v0 < 0) continue;
    for (size_t e = 1; e < t.entries.size(); ++e) {
      const int v = static_cast<int>(t.entries[e].first.back() - '0');
      EXPECT_EQ(tracks.Projection(0, t.entries[0].second, v), t.entries[e].second);
    }
  }
}

TEST(ConnectGroup, SingleViewHasNoTracks) {
  const SyntheticScene scene = GenerateScene(6, EasyScene(1));
  const GroupTracks tracks = ConnectGroup({&scene.images[0]});
  EXPECT_TRUE(tracks.tracks().empty());
  EXPECT_EQ(tracks.num_views(), 1);
}

TEST(ConnectGroup, AllOutlierPairContributesNothing) {
  const SyntheticScene scene = GenerateScene(7, EasyScene(2));
  std::vector<ImageFeatures> views = scene.images;
  // View 2 keeps its descriptors but its keypoints are scrambled, so every
  // descriptor match with it is geometrically inconsistent.
  auto rng = MakeRng(7);
  std::shuffle(views[2].keypoints.begin(), views[2].keypoints.end(), rng);
  std::vector<std::string> log;
  std::map<std::pair<int, int>, MatchSet> sets;
  const GroupTracks tracks =
      ConnectGroup({&views[0], &views[1], &views[2]}, {}, &log, &sets);
  EXPECT_FALSE(sets.at({0, 1}).pairs.empty());
  EXPECT_TRUE(sets.at({0, 2}).pairs.empty());
  EXPECT_TRUE(sets.at({1, 2}).pairs.empty());
  EXPECT_FALSE(log.empty());
  const GroupTracks clean = ConnectGroup({&views[0], &views[1]});
  EXPECT_EQ(tracks.pair_matches().at({0, 1}), clean.pair_matches().at({0, 1}));
}

PipelineConfig DescriptorPipeline() {
  PipelineConfig pc;
  pc.matcher = TargetMatcher::kDescriptor;
  pc.overlap = OverlapSource::kLabels;
  return pc;
}

void ExpectCoverage(const PipelineRun& run) {
  std::set<std::pair<std::string, std::string>> edges, matched;
  for (const auto& [i, j] : run.graph.Edges()) {
    const auto& a = run.graph.ids()[i];
    const auto& b = run.graph.ids()[j];
    edges.insert({std::min(a, b), std::max(a, b)});
  }
  for (const auto& pm : run.raw) {
    const auto k = std::pair(std::min(pm.source_id, pm.target_id),
                             std::max(pm.source_id, pm.target_id));
    EXPECT_TRUE(matched.insert(k).second) << "pair matched twice";
  }
  EXPECT_EQ(edges, matched);
  ASSERT_EQ(run.raw.size(), run.verified.size());
  for (size_t k = 0; k < run.raw.size(); ++k) {
    std::set<std::pair<int, int>> raw;
    for (const auto& m : run.raw[k].matches.pairs) raw.insert({m.u, m.x});
    for (const auto& m : run.verified[k].matches.pairs) {
      EXPECT_TRUE(raw.count({m.u, m.x}));
    }
  }
}

TEST(RunPipeline, NoiseFreeSceneRecoversGroundTruthTracks) {
  for (double theta_min : {0.3, 0.05}) {
    const SyntheticScene scene = GenerateScene(11, EasyScene(5));
    const ImageLabels labels = LabelsOf(scene);
    PipelineConfig pc = DescriptorPipeline();
    pc.grouping.theta_min = theta_min;
    const PipelineRun run = RunPipeline(scene.images, pc, nullptr, &labels);
    ExpectCoverage(run);
    EXPECT_EQ(run.tracks, GroundTruthTracks(scene.images, labels));
    if (theta_min < 0.1) EXPECT_LT(run.groups.size(), 6u);
  }
}

TEST(RunPipeline, DisjointScenesNeverShareTracks) {
  SceneConfig a = EasyScene(2), b = EasyScene(2);
  b.id_prefix = "w";
  const SceneBundle merged = MergeBundles(
      {BundleFromScene(GenerateScene(1, a)), BundleFromScene(GenerateScene(2, b))});
  const PipelineRun run =
      RunPipeline(merged.images, DescriptorPipeline(), nullptr, &merged.labels);
  ExpectCoverage(run);
  EXPECT_FALSE(run.tracks.empty());
  for (const auto& t : run.tracks) {
    std::set<char> prefixes;
    for (const auto& e : t.entries) prefixes.insert(e.first[0]);
    EXPECT_EQ(prefixes.size(), 1u);
  }
}

TEST(RunPipeline, LearnedMatcherDeterministicAcrossJobs) {
  SceneConfig sc = EasyScene(4);
  sc.descriptor_dim = 8;
  sc.num_points = 16;
  const SyntheticScene scene = GenerateScene(3, sc);
  const ImageLabels labels = LabelsOf(scene);
  PipelineConfig pc;
  pc.overlap = OverlapSource::kLabels;
  pc.grouping.theta_min = 0.05;
  pc.net.dim = 8;
  pc.net.layers = 2;
  pc.net.heads = 2;
  const ParamStore params = InitNetParams(pc.net, 1);
  const PipelineRun a = RunPipeline(scene.images, pc, &params, &labels);
  pc.jobs = 4;
  const PipelineRun b = RunPipeline(scene.images, pc, &params, &labels);
  ExpectCoverage(a);
  EXPECT_EQ(PipelineReport(a, false).dump(), PipelineReport(b, false).dump());
  ASSERT_EQ(a.verified.size(), b.verified.size());
  for (size_t k = 0; k < a.verified.size(); ++k) {
    EXPECT_EQ(PairMatchesToJson(a.verified[k]).dump(),
              PairMatchesToJson(b.verified[k]).dump());
  }
  EXPECT_EQ(a.tracks, b.tracks);
}

TEST(RunPipeline, LearnedMatcherNeedsParameters) {
  const SyntheticScene scene = GenerateScene(3, EasyScene(1));
  try {
    RunPipeline(scene.images, PipelineConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "no-checkpoint");
  }
}

TEST(MatchGroupToTarget, SingleSourceIsTwoViewPath) {
  SceneConfig sc = EasyScene(1);
  sc.descriptor_dim = 8;
  sc.num_points = 12;
  const SyntheticScene scene = GenerateScene(4, sc);
  NetConfig net;
  net.dim = 8;
  net.layers = 2;
  net.heads = 2;
  const ParamStore params = InitNetParams(net, 2);
  const GroupTracks empty = GroupTracks::Empty({scene.images[0].size()});
  const auto a = MatchGroupToTarget({&scene.images[0]}, scene.images[1], empty,
                                    params, net);
  AblationSwitches off{false, false, false};
  const auto b = MatchGroupToTarget({&scene.images[0]}, scene.images[1], empty,
                                    params, net, off);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].pairs.size(), b[0].pairs.size());
  for (size_t k = 0; k < a[0].pairs.size(); ++k) {
    EXPECT_EQ(a[0].pairs[k].x, b[0].pairs[k].x);
    EXPECT_EQ(a[0].pairs[k].score, b[0].pairs[k].score);
  }
}

TEST(Corruption, TrackPrecisionStaysHigh) {
  int passing = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const SyntheticScene scene = GenerateScene(seed, EasyScene(5));
    const ImageLabels labels = LabelsOf(scene);
    const PipelineRun run =
        RunPipeline(scene.images, DescriptorPipeline(), nullptr, &labels);
    std::map<std::string, int> counts;
    for (const auto& f : scene.images) counts[f.image_id] = f.size();
    const auto corrupted = CorruptMatches(run.verified, counts, 0.1, seed);
    passing += TrackPrecision(MergeTracks(corrupted), labels) >= 0.95;
  }
  EXPECT_GE(passing, 9);
}

}  // namespace
}  // namespace comatcher
