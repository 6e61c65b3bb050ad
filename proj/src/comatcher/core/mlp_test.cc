#include "comatcher/core/mlp.h"

#include <cmath>

#include <gtest/gtest.h>

#include "comatcher/core/error.h"
#include "comatcher/core/random.h"

namespace comatcher {
namespace {

// Loop-by-loop evaluation of the same perceptron.
std::vector<double> NaiveMlp(const ParamStore& s, const std::string& p,
                             const std::vector<double>& x) {
  const Tensor2& w1 = s.value(p + ".fc1.weight");
  const Tensor2& b1 = s.value(p + ".fc1.bias");
  const Tensor2& g = s.value(p + ".norm.gamma");
  const Tensor2& be = s.value(p + ".norm.beta");
  const Tensor2& w2 = s.value(p + ".fc2.weight");
  const Tensor2& b2 = s.value(p + ".fc2.bias");
  const int hidden = static_cast<int>(w1.cols());
  std::vector<double> h(hidden);
  for (int j = 0; j < hidden; ++j) {
    double acc = b1(0, j);
    for (size_t i = 0; i < x.size(); ++i) acc += x[i] * w1(i, j);
    h[j] = acc;
  }
  double mean = 0;
  for (double v : h) mean += v;
  mean /= hidden;
  double var = 0;
  for (double v : h) var += (v - mean) * (v - mean);
  var /= hidden;
  for (int j = 0; j < hidden; ++j) {
    const double z = (h[j] - mean) / std::sqrt(var + 1e-9) * g(0, j) + be(0, j);
    const double c = 0.7978845608028654 * (z + 0.044715 * z * z * z);
    h[j] = 0.5 * z * (1 + std::tanh(c));
  }
  std::vector<double> out(w2.cols());
  for (size_t k = 0; k < out.size(); ++k) {
    double acc = b2(0, k);
    for (int j = 0; j < hidden; ++j) acc += h[j] * w2(j, k);
    out[k] = acc;
  }
  return out;
}

TEST(Mlp, ZeroWeightsGiveZero) {
  ParamStore s;
  AddMlpParams(&s, "m", {3, 6, 3});
  for (const auto& n : s.Names()) s.mutable_value(n).setZero();
  Tensor2 x(2, 3);
  x << 1, -2, 3, 0.5, 7, -1;
  EXPECT_TRUE(MlpForward(s, "m", x).isZero(0.0));
}

TEST(Mlp, HandComputedDuplicatingConfiguration) {
  ParamStore s;
  AddMlpParams(&s, "m", {2, 4, 2});
  Tensor2 w1(2, 4);
  w1 << 1, 0, 1, 0, 0, 1, 0, 1;
  Tensor2 w2(4, 2);
  w2 << 0.5, 0, 0, 0.5, 0.5, 0, 0, 0.5;
  s.mutable_value("m.fc1.weight") = w1;
  s.mutable_value("m.fc1.bias").setZero();
  s.mutable_value("m.fc2.weight") = w2;
  s.mutable_value("m.fc2.bias").setZero();
  Tensor2 x(1, 2);
  x << 1, 2;
  // hidden [1 2 1 2] standardizes to [-z z -z z], z = 0.5 / sqrt(0.25 + eps).
  const Tensor2 y = MlpForward(s, "m", x);
  EXPECT_NEAR(y(0, 0), -0.15880800955765146193, 1e-14);
  EXPECT_NEAR(y(0, 1), 0.84119198844234854407, 1e-14);
}

TEST(Mlp, MatchesStraightLineImplementation) {
  ParamStore s(77);
  AddMlpParams(&s, "m", {4, 8, 4});
  auto rng = MakeRng(3);
  for (const auto& n : s.Names()) {
    Tensor2& v = s.mutable_value(n);
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      v.data()[k] = StandardNormal(rng);
    }
  }
  Tensor2 x(3, 4);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = StandardNormal(rng);
  const Tensor2 y = MlpForward(s, "m", x);
  ad::Tape tape;
  const Tensor2 y_tape = Mlp(tape, s, "m", tape.Constant(x)).value();
  for (int r = 0; r < 3; ++r) {
    std::vector<double> row(x.row(r).data(), x.row(r).data() + 4);
    const auto ref = NaiveMlp(s, "m", row);
    for (int c = 0; c < 4; ++c) {
      EXPECT_NEAR(y(r, c), ref[c], 1e-12);
      EXPECT_NEAR(y_tape(r, c), ref[c], 1e-12);
    }
  }
}

TEST(Mlp, ShapeMismatchNamesParameter) {
  ParamStore s;
  AddMlpParams(&s, "blk", {4, 8, 4});
  try {
    MlpForward(s, "blk", Tensor2::Zero(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "shape-mismatch");
    EXPECT_NE(std::string(e.what()).find("blk.fc1.weight"), std::string::npos);
  }
  s.mutable_value("blk.norm.gamma") = Tensor2::Ones(1, 7);
  try {
    MlpForward(s, "blk", Tensor2::Zero(2, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("blk.norm.gamma"), std::string::npos);
  }
}

}  // namespace
}  // namespace comatcher
