#include "comatcher/core/ops.h"

#include <gtest/gtest.h>

#include "comatcher/core/grad_check.h"
#include "comatcher/core/random.h"

namespace comatcher {
namespace {

Tensor2 RandomTensor(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c,
                     double scale = 1.0) {
  Tensor2 t(r, c);
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    t.data()[k] = scale * StandardNormal(rng);
  }
  return t;
}

// Contracts the op output with a fixed random weight so every output entry
// contributes to the scalar that is checked.
double CheckOp(const std::function<ad::Var(ad::Tape&, const ParamStore&)>& op,
               const ParamStore& params, uint64_t seed) {
  auto rng = MakeRng(seed, 99);
  ad::Tape probe(false);
  const ad::Var out = op(probe, params);
  const Tensor2 weight = RandomTensor(rng, out.rows(), out.cols());
  LossBuilder loss = [&](ad::Tape& tape, const ParamStore& p) {
    return ad::Sum(ad::Hadamard(op(tape, p), tape.Constant(weight)));
  };
  return GradCheck(loss, params, 1e-6).max_relative_error;
}

class OpsGradientTest : public ::testing::Test {
 protected:
  void SetUp() override {
    auto rng = MakeRng(2024);
    params_.Add("a", RandomTensor(rng, 5, 5));
    params_.Add("b", RandomTensor(rng, 5, 5));
    params_.Add("row", RandomTensor(rng, 1, 5));
    params_.Add("col", RandomTensor(rng, 5, 1));
    params_.Add("gamma", RandomTensor(rng, 1, 5));
    params_.Add("beta", RandomTensor(rng, 1, 5));
  }
  ad::Var P(ad::Tape& t, const ParamStore& p, const std::string& n) {
    return t.Parameter(p, n);
  }
  ParamStore params_;
};

#define EXPECT_OP_GRAD(expr)                                            \
  EXPECT_LT(CheckOp(                                                    \
                [&](ad::Tape& t, const ParamStore& p) { return (expr); }, \
                params_, __LINE__),                                     \
            1e-6)

TEST_F(OpsGradientTest, Linear) {
  EXPECT_OP_GRAD(ad::MatMul(P(t, p, "a"), P(t, p, "b")));
  EXPECT_OP_GRAD(ad::MatMulNT(P(t, p, "a"), P(t, p, "b")));
  EXPECT_OP_GRAD(ad::Transpose(P(t, p, "a")));
  EXPECT_OP_GRAD(ad::Add(P(t, p, "a"), P(t, p, "b")));
  EXPECT_OP_GRAD(ad::Sub(P(t, p, "a"), P(t, p, "b")));
  EXPECT_OP_GRAD(ad::Hadamard(P(t, p, "a"), P(t, p, "b")));
  EXPECT_OP_GRAD(ad::Scale(P(t, p, "a"), -1.7));
  EXPECT_OP_GRAD(ad::AddRowBroadcast(P(t, p, "a"), P(t, p, "row")));
  EXPECT_OP_GRAD(ad::Linear(P(t, p, "a"), P(t, p, "b"), P(t, p, "row")));
}

TEST_F(OpsGradientTest, RowwiseAndStructural) {
  VectorX w(5);
  w << 0.5, -1.0, 2.0, 0.0, 3.0;
  EXPECT_OP_GRAD(ad::RowScale(P(t, p, "a"), w));
  EXPECT_OP_GRAD(ad::ColumnMul(P(t, p, "col"), P(t, p, "a")));
  EXPECT_OP_GRAD(ad::RowDot(P(t, p, "a"), P(t, p, "b")));
  EXPECT_OP_GRAD(ad::ConcatCols({P(t, p, "a"), P(t, p, "col"), P(t, p, "b")}));
  EXPECT_OP_GRAD(ad::SliceCols(P(t, p, "a"), 1, 3));
  EXPECT_OP_GRAD(ad::Sum(P(t, p, "a")));
  EXPECT_OP_GRAD(ad::AddAll({P(t, p, "a"), P(t, p, "b"), P(t, p, "a")}));
}

TEST_F(OpsGradientTest, Nonlinear) {
  EXPECT_OP_GRAD(ad::RowSoftmax(P(t, p, "a")));
  EXPECT_OP_GRAD(ad::Sigmoid(P(t, p, "a")));
  EXPECT_OP_GRAD(ad::Gelu(P(t, p, "a")));
  EXPECT_OP_GRAD(
      ad::LayerNorm(P(t, p, "a"), P(t, p, "gamma"), P(t, p, "beta")));
}

TEST_F(OpsGradientTest, WeightedLogSum) {
  std::vector<ad::LogTerm> terms = {{0, 0, 1.0}, {1, 3, 0.5}, {4, 2, 2.0},
                                    {1, 3, 0.25}};
  EXPECT_OP_GRAD(ad::WeightedLogSum(ad::Sigmoid(P(t, p, "a")), terms, false));
  EXPECT_OP_GRAD(ad::WeightedLogSum(ad::Sigmoid(P(t, p, "a")), terms, true));
}

TEST_F(OpsGradientTest, ReplayIsBitwiseIdentical) {
  auto run = [&] {
    ad::Tape tape;
    ad::Var a = tape.Parameter(params_, "a");
    ad::Var b = tape.Parameter(params_, "b");
    ad::Var y = ad::Sum(ad::RowSoftmax(ad::MatMul(ad::Gelu(a), b)));
    tape.Backward(y);
    tape.Backward(y);
    return tape.ParameterGradients();
  };
  const auto g1 = run();
  const auto g2 = run();
  ASSERT_EQ(g1.size(), g2.size());
  for (const auto& [name, g] : g1) {
    EXPECT_TRUE(g == g2.at(name)) << name;
  }
}

TEST(Tape, ValueOnlyTapeHasNoGradients) {
  ParamStore store;
  store.Add("w", Tensor2::Ones(2, 2));
  ad::Tape tape(false);
  ad::Var w = tape.Parameter(store, "w");
  ad::Var y = ad::Sum(ad::Scale(w, 2.0));
  EXPECT_DOUBLE_EQ(y.value()(0, 0), 8.0);
}

TEST(Tape, SharedInputAccumulates) {
  ParamStore store;
  store.Add("w", Tensor2::Constant(1, 1, 3.0));
  ad::Tape tape;
  ad::Var w = tape.Parameter(store, "w");
  tape.Backward(ad::Hadamard(w, w));
  EXPECT_DOUBLE_EQ(tape.grad(w.id())(0, 0), 6.0);
}

}  // namespace
}  // namespace comatcher
