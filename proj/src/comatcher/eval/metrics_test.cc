#include "comatcher/eval/metrics.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "comatcher/core/error.h"
#include "comatcher/eval/stats.h"

namespace comatcher {
namespace {

MatchSet Predicted(const std::vector<std::pair<int, int>>& pairs) {
  MatchSet m;
  for (const auto& [u, x] : pairs) m.pairs.push_back({u, x, 1.0});
  return m;
}

GtLabels SmallGt() {
  GtLabels gt;
  gt.matches = {{0, 0}, {1, 1}, {2, 2}};
  gt.unmatched_source = {3};
  gt.unmatched_target = {4};
  return gt;
}

TEST(PrecisionRecall, HandExample) {
  // (0,0) correct, (1,2) wrong, (3,5) wrong through a labeled source,
  // (5,6) has no labeled endpoint and is ignored.
  const auto r = ComputePrecisionRecall(
      Predicted({{0, 0}, {1, 2}, {3, 5}, {5, 6}}), SmallGt());
  EXPECT_EQ(r.correct, 1);
  EXPECT_EQ(r.considered, 3);
  EXPECT_EQ(r.gt, 3);
  EXPECT_DOUBLE_EQ(r.precision, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.recall, 1.0 / 3.0);
}

TEST(PrecisionRecall, MatchesBruteForceOracle) {
  const GtLabels gt = SmallGt();
  // All predictions over a 6 x 7 grid, one at a time.
  for (int u = 0; u < 6; ++u) {
    for (int x = 0; x < 7; ++x) {
      const auto r = ComputePrecisionRecall(Predicted({{u, x}}), gt);
      const bool correct = (u == x && u < 3);
      const bool labeled = u <= 3 || x <= 2 || x == 4;
      EXPECT_EQ(r.correct, correct ? 1 : 0) << u << "," << x;
      EXPECT_EQ(r.considered, labeled ? 1 : 0) << u << "," << x;
    }
  }
}

TEST(PrecisionRecall, EmptySidesGiveOne) {
  const auto none = ComputePrecisionRecall(MatchSet{}, SmallGt());
  EXPECT_TRUE(none.precision_empty);
  EXPECT_DOUBLE_EQ(none.precision, 1.0);
  EXPECT_DOUBLE_EQ(none.recall, 0.0);
  const auto nogt = ComputePrecisionRecall(Predicted({{0, 0}}), GtLabels{});
  EXPECT_TRUE(nogt.recall_empty);
  EXPECT_DOUBLE_EQ(nogt.recall, 1.0);
}

TEST(PrecisionRecall, PoolSumsCounts) {
  const auto a = ComputePrecisionRecall(Predicted({{0, 0}}), SmallGt());
  const auto b = ComputePrecisionRecall(Predicted({{0, 1}, {1, 1}}), SmallGt());
  const auto p = Pool({a, b});
  EXPECT_EQ(p.correct, 2);
  EXPECT_EQ(p.considered, 3);
  EXPECT_EQ(p.gt, 6);
  EXPECT_DOUBLE_EQ(p.precision, 2.0 / 3.0);
}

// Area under the fraction-of-samples-below-e curve on [0, T], divided by T.
double IntegratedAuc(const std::vector<double>& errors, double t) {
  const int n = 500000;
  double area = 0;
  for (int k = 0; k < n; ++k) {
    const double e = (k + 0.5) * t / n;
    int below = 0;
    for (double x : errors) below += x <= e;
    area += static_cast<double>(below) / errors.size();
  }
  return area / n;
}

TEST(CornerAuc, HandValues) {
  const auto auc = CornerAuc({0, 1, 2, 4});
  ASSERT_EQ(auc.size(), 3u);
  EXPECT_NEAR(auc[0], 0.25, 1e-12);
  EXPECT_NEAR(auc[1], 0.5, 1e-12);
  EXPECT_NEAR(auc[2], 0.65, 1e-12);
}

TEST(CornerAuc, MatchesCurveIntegration) {
  const std::vector<double> errors = {0, 1, 2, 4, 0.37, 7.5, 2.9};
  const auto auc = CornerAuc(errors, {1, 3, 5});
  EXPECT_NEAR(auc[0], IntegratedAuc(errors, 1), 1e-5);
  EXPECT_NEAR(auc[1], IntegratedAuc(errors, 3), 1e-5);
  EXPECT_NEAR(auc[2], IntegratedAuc(errors, 5), 1e-5);
}

TEST(CornerAuc, FailuresCountAsZero) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto auc = CornerAuc({0, inf});
  EXPECT_DOUBLE_EQ(auc[2], 0.5);
}

TEST(CornerAuc, MonotoneInErrorsAndThreshold) {
  std::vector<double> errors = {0.5, 1.5, 2.5, 3.5};
  double prev = CornerAuc(errors, {3})[0];
  for (int k = 0; k < 4; ++k) {
    errors[k] += 1.0;
    const double now = CornerAuc(errors, {3})[0];
    EXPECT_LE(now, prev);
    prev = now;
  }
  const auto auc = CornerAuc(errors, {1, 2, 3, 4, 5, 10});
  for (size_t k = 1; k < auc.size(); ++k) EXPECT_GE(auc[k], auc[k - 1]);
  for (double a : auc) {
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
}

TEST(CornerAuc, RejectsBadInput) {
  EXPECT_THROW(CornerAuc({}), Error);
  EXPECT_THROW(CornerAuc({-1.0}), Error);
  EXPECT_THROW(CornerAuc({std::nan("")}), Error);
  try {
    CornerAuc({});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "empty-eval");
  }
}

TEST(TrackStats, CountsAndMeanLength) {
  std::vector<GlobalTrack> tracks(3);
  tracks[0].entries = {{"a", 0}, {"b", 0}};
  tracks[1].entries = {{"a", 1}, {"b", 1}, {"c", 1}};
  tracks[2].entries = {{"a", 2}, {"b", 2}, {"c", 2}, {"d", 2}};
  const TrackStats s = ComputeTrackStats(tracks);
  EXPECT_EQ(s.num_landmarks, 3);
  EXPECT_DOUBLE_EQ(s.mean_track_length, 3.0);
  EXPECT_EQ(ComputeTrackStats({}).num_landmarks, 0);
}

TEST(Stats, MeanAndSampleStd) {
  const MeanStd m = ComputeMeanStd({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.stddev, std::sqrt(5.0 / 3.0), 1e-12);
  EXPECT_DOUBLE_EQ(ComputeMeanStd({7}).stddev, 0.0);
}

TEST(Stats, SignTest) {
  EXPECT_NEAR(SignTestPValue(5, 0), 1.0 / 32.0, 1e-12);
  EXPECT_NEAR(SignTestPValue(3, 2), 0.5, 1e-12);
  EXPECT_NEAR(SignTestPValue(0, 4), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(SignTestPValue(0, 0), 1.0);
  // 15 of 20: sum_{k>=15} C(20,k) / 2^20 = 21700 / 1048576.
  EXPECT_NEAR(SignTestPValue(15, 5), 21700.0 / 1048576.0, 1e-12);
}

}  // namespace
}  // namespace comatcher
