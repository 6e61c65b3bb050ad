#include "comatcher/training/losses.h"

#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "comatcher/core/error.h"
#include "comatcher/core/grad_check.h"
#include "comatcher/core/ops.h"

namespace comatcher {
namespace {

struct Prediction {
  Tensor2 p;
  VectorX ss, st;
};

double ValueOf(const Prediction& pr, const GtLabels& l) {
  return CorrespondenceLossValue(pr.p, pr.ss, pr.st, l);
}

double TapeValueOf(const Prediction& pr, const GtLabels& l) {
  ad::Tape tape(false);
  PairPrediction pp{tape.Constant(pr.p), tape.Constant(Tensor2(pr.ss)),
                    tape.Constant(Tensor2(pr.st))};
  return CorrespondenceLoss(pp, l).value()(0, 0);
}

Prediction RandomPrediction(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> u(0.001, 0.999);
  Prediction pr{Tensor2(n, m), VectorX(n), VectorX(m)};
  for (Eigen::Index k = 0; k < pr.p.size(); ++k) pr.p.data()[k] = u(rng);
  for (int k = 0; k < n; ++k) pr.ss(k) = u(rng);
  for (int k = 0; k < m; ++k) pr.st(k) = u(rng);
  return pr;
}

TEST(CorrespondenceLoss, PerfectPrediction) {
  Prediction pr{Tensor2::Constant(3, 3, 1e-12), VectorX::Constant(3, 1e-12),
                VectorX::Constant(3, 1e-12)};
  GtLabels l;
  l.matches = {{0, 1}, {1, 0}};
  l.unmatched_source = {2};
  l.unmatched_target = {2};
  for (const auto& [u, x] : l.matches) pr.p(u, x) = 1 - 1e-12;
  EXPECT_LT(ValueOf(pr, l), 1e-9);
  EXPECT_LT(TapeValueOf(pr, l), 1e-9);
}

TEST(CorrespondenceLoss, SinglePairHalf) {
  Prediction pr{Tensor2::Constant(2, 2, 0.5), VectorX::Constant(2, 0.5),
                VectorX::Constant(2, 0.5)};
  GtLabels l;
  l.matches = {{1, 0}};
  EXPECT_NEAR(ValueOf(pr, l), std::log(2.0), 1e-12);
  EXPECT_NEAR(TapeValueOf(pr, l), std::log(2.0), 1e-12);
}

TEST(CorrespondenceLoss, DirectSummationOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Prediction pr = RandomPrediction(rng, 6, 5);
    GtLabels l;
    l.matches = {{0, 4}, {2, 1}, {5, 0}};
    l.unmatched_source = {1, 3};
    l.unmatched_target = {2};
    const double expected =
        -(std::log(pr.p(0, 4)) + std::log(pr.p(2, 1)) + std::log(pr.p(5, 0))) / 3 -
        (std::log(1 - pr.ss(1)) + std::log(1 - pr.ss(3))) / 4 -
        std::log(1 - pr.st(2)) / 2;
    EXPECT_NEAR(ValueOf(pr, l), expected, 1e-12);
    EXPECT_NEAR(TapeValueOf(pr, l), expected, 1e-12);
  }
}

TEST(CorrespondenceLoss, EmptySupervision) {
  const Prediction pr{Tensor2::Constant(2, 2, 0.5), VectorX::Constant(2, 0.5),
                      VectorX::Constant(2, 0.5)};
  try {
    ValueOf(pr, GtLabels{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "empty-supervision");
  }
  EXPECT_THROW(TapeValueOf(pr, GtLabels{}), Error);
  GtLabels bad;
  bad.matches = {{0, 7}};
  EXPECT_THROW(ValueOf(pr, bad), Error);
}

TEST(CorrespondenceLoss, MonotoneInProbabilityAndMatchability) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    Prediction pr = RandomPrediction(rng, 4, 4);
    GtLabels l;
    l.matches = {{1, 2}};
    l.unmatched_source = {0};
    l.unmatched_target = {3};
    const double base = ValueOf(pr, l);
    Prediction up = pr;
    up.p(1, 2) = std::min(0.9999, pr.p(1, 2) + 1e-4);
    EXPECT_LT(ValueOf(up, l), base);
    Prediction s = pr;
    s.ss(0) = std::min(0.9999, pr.ss(0) + 1e-4);
    EXPECT_GT(ValueOf(s, l), base);
    Prediction t = pr;
    t.st(3) = std::min(0.9999, pr.st(3) + 1e-4);
    EXPECT_GT(ValueOf(t, l), base);
  }
}

TEST(ConfidenceLoss, ExactLabelsAndConstantHalf) {
  std::vector<VectorX> y = {VectorX(4), VectorX(4)};
  y[0] << 1, 0, 0, 1;
  y[1] << 0, 1, 1, 1;
  EXPECT_LT(ConfidenceLossValue(y, y), 1e-9);
  const std::vector<VectorX> half = {VectorX::Constant(4, 0.5),
                                     VectorX::Constant(4, 0.5)};
  EXPECT_NEAR(ConfidenceLossValue(half, y), 4 * std::log(2.0), 1e-9);
  ad::Tape tape(false);
  const auto v = ConfidenceLoss(
      {tape.Constant(Tensor2(half[0])), tape.Constant(Tensor2(half[1]))}, y);
  EXPECT_NEAR(v.value()(0, 0), 4 * std::log(2.0), 1e-9);
}

TEST(ConfidenceLoss, DirectSummationOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<VectorX> c(3, VectorX(5)), y(3, VectorX(5));
    double expected = 0;
    for (int l = 0; l < 3; ++l) {
      for (int k = 0; k < 5; ++k) {
        c[l](k) = u(rng);
        y[l](k) = coin(rng) ? 1 : 0;
        expected -= y[l](k) * std::log(c[l](k)) +
                    (1 - y[l](k)) * std::log(1 - c[l](k));
      }
    }
    expected /= 3;
    EXPECT_NEAR(ConfidenceLossValue(c, y), expected, 1e-12);
    ad::Tape tape(false);
    std::vector<ad::Var> vars;
    for (const auto& x : c) vars.push_back(tape.Constant(Tensor2(x)));
    EXPECT_NEAR(ConfidenceLoss(vars, y).value()(0, 0), expected, 1e-12);
  }
}

TEST(ConfidenceLabels, IdenticalFeaturesAgree) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  Tensor2 a(5, 4), b(6, 4);
  for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = g(rng);
  for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = g(rng);
  const MatchSet final_matches =
      MutualArgmax(DualSoftmaxValues(a * b.transpose()), 0.1);
  const auto y = ConfidenceLabels({{a, b}, {a, b}}, final_matches, 0.1);
  ASSERT_EQ(y.size(), 2u);
  for (const auto& layer : y) EXPECT_EQ(layer, VectorX::Ones(5));
}

TEST(ConfidenceLabels, DisagreementGivesZero) {
  // Zero features: the uniform dual softmax stays below the threshold, so
  // nothing matches at that layer.
  const Tensor2 a = Tensor2::Zero(3, 2), b = Tensor2::Zero(3, 2);
  MatchSet final_matches;
  final_matches.pairs = {{0, 1, 0.9}, {2, 2, 0.8}};
  const auto y = ConfidenceLabels({{a, b}}, final_matches, 0.2);
  VectorX expected(3);
  expected << 0, 1, 0;
  EXPECT_EQ(y[0], expected);
}

TEST(ConfidenceLabels, HandTrace) {
  // Layer 0 pairs (0,0) and (1,1); the final stage pairs (0,0) and (1,2).
  Tensor2 a(2, 3), b(3, 3);
  a << 4, 0, 0, 0, 4, 0;
  b << 4, 0, 0, 0, 4, 0, 0, 0, 4;
  MatchSet final_matches;
  final_matches.pairs = {{0, 0, 0.9}, {1, 2, 0.6}};
  const auto y = ConfidenceLabels({{a, b}}, final_matches, 0.1);
  VectorX expected(2);
  expected << 1, 0;
  EXPECT_EQ(y[0], expected);
}

TEST(TotalLoss, Arithmetic) {
  EXPECT_DOUBLE_EQ(TotalLoss({2.0}, {4.0}, 0.5).total, 4.0);
  EXPECT_DOUBLE_EQ(TotalLoss({1.0, 3.0}, {7.0, 9.0}, 0.0).total, 2.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 10);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(4), b(4);
    double s = 0;
    const double alpha = u(rng) / 10;
    for (int k = 0; k < 4; ++k) {
      a[k] = u(rng);
      b[k] = u(rng);
      s += a[k] + alpha * b[k];
    }
    const LossBreakdown lb = TotalLoss(a, b, alpha);
    EXPECT_NEAR(lb.total, s / 4, 1e-12);
    EXPECT_EQ(lb.corr, a);
    EXPECT_EQ(lb.alpha, alpha);
  }
  EXPECT_THROW(TotalLoss({1.0}, {1.0, 2.0}), Error);
}

// Toy group: two sources of 4 points, a target of 4 points.
struct ToyGroup {
  NetConfig cfg;
  std::vector<ImageFeatures> sources;
  ImageFeatures target;
  GroupTracks tracks;
  std::vector<GtLabels> labels;

  explicit ToyGroup(uint64_t seed) {
    cfg.dim = 8;
    cfg.layers = 2;
    cfg.heads = 2;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> px(0, 60), g(-1, 1);
    auto image = [&](const std::string& id) {
      ImageFeatures f;
      f.image_id = id;
      f.width = 64;
      f.height = 64;
      f.descriptors.resize(4, 8);
      for (int k = 0; k < 4; ++k) {
        f.keypoints.push_back({px(rng), px(rng)});
        for (int c = 0; c < 8; ++c) f.descriptors(k, c) = g(rng);
        f.descriptors.row(k).normalize();
      }
      return f;
    };
    sources = {image("a"), image("b")};
    target = image("t");
    tracks = GroupTracks::Build({4, 4}, {{{0, 1}, {{0, 1}, {2, 3}}}});
    GtLabels l0, l1;
    l0.matches = {{0, 0}, {1, 2}};
    l0.unmatched_source = {3};
    l0.unmatched_target = {1};
    l1.matches = {{1, 0}, {3, 3}};
    l1.unmatched_source = {0};
    labels = {l0, l1};
  }

  GroupInput Input() const {
    return MakeGroupInput(cfg, {&sources[0], &sources[1]}, target, tracks);
  }
};

TEST(GroupLoss, GradientMatchesFiniteDifferences) {
  const ToyGroup g(11);
  const ParamStore p = InitNetParams(g.cfg, 2);
  const GroupInput in = g.Input();
  const LossBuilder loss = [&](ad::Tape& tape, const ParamStore& params) {
    return ComputeGroupLoss(tape, params, g.cfg, in, g.labels).total;
  };
  const auto r = GradCheck(loss, p, 1e-6);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_parameter;
}

TEST(GroupLoss, BreakdownMatchesTape) {
  const ToyGroup g(12);
  const ParamStore p = InitNetParams(g.cfg, 3);
  ad::Tape tape(false);
  const GroupLoss gl = ComputeGroupLoss(tape, p, g.cfg, g.Input(), g.labels);
  EXPECT_NEAR(gl.total.value()(0, 0), gl.breakdown.total, 1e-12);
  for (double c : gl.breakdown.corr) EXPECT_GE(c, 0.0);
  for (double c : gl.breakdown.conf) EXPECT_GE(c, 0.0);
}

TEST(GroupLoss, PairWithoutLabelsContributesZero) {
  ToyGroup g(13);
  g.labels[1] = GtLabels{};
  const ParamStore p = InitNetParams(g.cfg, 3);
  ad::Tape tape(false);
  const GroupLoss gl = ComputeGroupLoss(tape, p, g.cfg, g.Input(), g.labels);
  EXPECT_EQ(gl.breakdown.corr[1], 0.0);
  EXPECT_EQ(gl.breakdown.conf[1], 0.0);
  EXPECT_NEAR(gl.breakdown.total,
              (gl.breakdown.corr[0] + 0.5 * gl.breakdown.conf[0]) / 2, 1e-12);
}

TEST(GroupLoss, KeypointPermutationInvariance) {
  const ToyGroup g(14);
  const ParamStore p = InitNetParams(g.cfg, 4);
  ad::Tape t1(false);
  const double base =
      ComputeGroupLoss(t1, p, g.cfg, g.Input(), g.labels).breakdown.total;

  // new index = perm[old index], applied to every image.
  const std::vector<int> perm = {2, 0, 3, 1};
  auto permute = [&](const ImageFeatures& f) {
    ImageFeatures out = f;
    for (int k = 0; k < 4; ++k) {
      out.keypoints[perm[k]] = f.keypoints[k];
      out.descriptors.row(perm[k]) = f.descriptors.row(k);
    }
    return out;
  };
  ToyGroup h = g;
  h.sources = {permute(g.sources[0]), permute(g.sources[1])};
  h.target = permute(g.target);
  PairMatchMap pm;
  for (const auto& m : g.tracks.pair_matches().at({0, 1})) {
    pm[{0, 1}].push_back({perm[m.first], perm[m.second]});
  }
  h.tracks = GroupTracks::Build({4, 4}, pm);
  for (auto& l : h.labels) {
    for (auto& [u, x] : l.matches) {
      u = perm[u];
      x = perm[x];
    }
    for (int& u : l.unmatched_source) u = perm[u];
    for (int& x : l.unmatched_target) x = perm[x];
  }
  ad::Tape t2(false);
  const double shuffled =
      ComputeGroupLoss(t2, p, h.cfg, h.Input(), h.labels).breakdown.total;
  EXPECT_NEAR(base, shuffled, 1e-9);
}

}  // namespace
}  // namespace comatcher
