#include "comatcher/eval/benchmark.h"

#include <gtest/gtest.h>

#include "comatcher/core/error.h"

namespace comatcher {
namespace {

BenchmarkConfig SmallConfig() {
  BenchmarkConfig c;
  c.scene.num_points = 24;
  c.scene.num_sources = 3;
  c.scene.descriptor_dim = 8;
  c.net.dim = 8;
  c.net.layers = 2;
  c.net.heads = 2;
  c.net.max_sources = 3;
  c.seeds = {1, 2, 3};
  c.matchers = AblationMatchers(3);
  MatcherConfig d;
  d.name = "descriptor";
  d.kind = MatcherKind::kDescriptor;
  c.matchers.push_back(d);
  return c;
}

TEST(Benchmark, AblationMatcherSet) {
  const auto m = AblationMatchers(2);
  ASSERT_EQ(m.size(), 4u);
  EXPECT_EQ(m[0].name, "full");
  EXPECT_FALSE(m[1].ablation.source_cross);
  EXPECT_FALSE(m[2].ablation.propagation);
  EXPECT_FALSE(m[3].ablation.correlation);
  for (const auto& x : m) EXPECT_EQ(x.group_size, 2);
}

TEST(Benchmark, ReportLayoutAndRanges) {
  const BenchmarkConfig cfg = SmallConfig();
  const ParamStore params = InitNetParams(cfg.net, 5);
  const BenchmarkResult r = RunBenchmark(cfg, &params);
  ASSERT_EQ(r.reports.size(), 15u);
  ASSERT_EQ(r.summary.size(), 5u);
  EXPECT_EQ(r.reports[0].matcher, "full");
  EXPECT_EQ(r.reports[3].matcher, "no_source_cross");
  EXPECT_EQ(r.reports[2].seed, 3u);
  for (const auto& rep : r.reports) {
    EXPECT_GE(rep.pr.precision, 0.0);
    EXPECT_LE(rep.pr.precision, 1.0);
    ASSERT_EQ(rep.auc.size(), 3u);
    EXPECT_LE(rep.auc[0], rep.auc[2]);
    EXPECT_GT(rep.pr.gt, 0);
  }
  EXPECT_EQ(r.config_hash.size(), 40u);
  EXPECT_TRUE(r.checkpoint_hash.empty());
  // The descriptor matcher on clean scenes is nearly exact.
  EXPECT_GT(r.summary[4].precision.mean, 0.9);
  EXPECT_GT(r.summary[4].auc5.mean, 0.5);
}

TEST(Benchmark, DeterministicAcrossJobs) {
  BenchmarkConfig cfg = SmallConfig();
  const ParamStore params = InitNetParams(cfg.net, 5);
  const auto a = BenchmarkToJson(RunBenchmark(cfg, &params));
  cfg.jobs = 3;
  const auto b = BenchmarkToJson(RunBenchmark(cfg, &params));
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Benchmark, LearnedMatcherNeedsCheckpoint) {
  const BenchmarkConfig cfg = SmallConfig();
  try {
    RunBenchmark(cfg, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "no-checkpoint");
    EXPECT_EQ(e.kind(), ErrorKind::kUsage);
  }
  BenchmarkConfig desc = cfg;
  desc.matchers = {cfg.matchers.back()};
  EXPECT_NO_THROW(RunBenchmark(desc, nullptr));
}

TEST(Benchmark, ConfigHashTracksConfig) {
  BenchmarkConfig a = SmallConfig();
  BenchmarkConfig b = a;
  b.seeds.push_back(4);
  EXPECT_NE(BenchmarkConfigToJson(a).dump(), BenchmarkConfigToJson(b).dump());
}

}  // namespace
}  // namespace comatcher
