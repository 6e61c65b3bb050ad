#include "comatcher/match/match_head.h"

#include "comatcher/core/error.h"
#include "comatcher/core/kernels.h"
#include "comatcher/core/ops.h"
#include "comatcher/net/attention.h"

namespace comatcher {

ad::Var ScoreMatrix(ad::Tape& tape, const ParamStore& params, ad::Var source,
                    ad::Var target) {
  if (source.cols() != target.cols()) {
    throw Error("shape-mismatch", "score matrix: " +
                                      ShapeString(source.value()) + " vs " +
                                      ShapeString(target.value()));
  }
  return ad::MatMulNT(Project(tape, params, "head.proj", source),
                      Project(tape, params, "head.proj", target));
}

ad::Var DualSoftmax(ad::Var scores) {
  return ad::Hadamard(ad::RowSoftmax(scores),
                      ad::Transpose(ad::RowSoftmax(ad::Transpose(scores))));
}

ad::Var Matchability(ad::Tape& tape, const ParamStore& params, ad::Var f) {
  return ad::Sigmoid(Project(tape, params, "head.matchability", f));
}

ad::Var Assignment(ad::Var dual, ad::Var sigma_source, ad::Var sigma_target) {
  if (sigma_source.rows() != dual.rows() || sigma_target.rows() != dual.cols()) {
    throw Error("shape-mismatch", "assignment: " + ShapeString(dual.value()));
  }
  const ad::Var rows = ad::ColumnMul(sigma_source, dual);
  return ad::Transpose(ad::ColumnMul(sigma_target, ad::Transpose(rows)));
}

Tensor2 DualSoftmaxValues(const Tensor2& scores) {
  ad::Tape tape(false);
  return DualSoftmax(tape.Constant(scores)).value();
}

Tensor2 AssignmentValues(const Tensor2& dual, const VectorX& sigma_source,
                         const VectorX& sigma_target) {
  ad::Tape tape(false);
  return Assignment(tape.Constant(dual), tape.Constant(Tensor2(sigma_source)),
                    tape.Constant(Tensor2(sigma_target)))
      .value();
}

PairPrediction PredictPair(ad::Tape& tape, const ParamStore& params,
                           ad::Var source, ad::Var target) {
  PairPrediction out;
  out.sigma_source = Matchability(tape, params, source);
  out.sigma_target = Matchability(tape, params, target);
  out.assignment =
      Assignment(DualSoftmax(ScoreMatrix(tape, params, source, target)),
                 out.sigma_source, out.sigma_target);
  return out;
}

MatchSet MutualArgmax(const Tensor2& p, double threshold) {
  MatchSet out;
  const Eigen::Index n = p.rows();
  const Eigen::Index m = p.cols();
  std::vector<char> used_x(m, 0);
  if (n > 0 && m > 0) {
    std::vector<Eigen::Index> best_u(m);
    for (Eigen::Index x = 0; x < m; ++x) p.col(x).maxCoeff(&best_u[x]);
    for (Eigen::Index u = 0; u < n; ++u) {
      Eigen::Index x;
      const Scalar v = p.row(u).maxCoeff(&x);
      if (best_u[x] == u && v >= threshold) {
        out.pairs.push_back({static_cast<int>(u), static_cast<int>(x),
                             static_cast<double>(v)});
        used_x[x] = 1;
      } else {
        out.unmatched_source.push_back(static_cast<int>(u));
      }
    }
  } else {
    for (Eigen::Index u = 0; u < n; ++u) {
      out.unmatched_source.push_back(static_cast<int>(u));
    }
  }
  for (Eigen::Index x = 0; x < m; ++x) {
    if (!used_x[x]) out.unmatched_target.push_back(static_cast<int>(x));
  }
  return out;
}

MatchSet FilterMatches(const Tensor2& p, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error("invalid-threshold", std::to_string(threshold),
                ErrorKind::kUsage);
  }
  return MutualArgmax(p, threshold);
}

}  // namespace comatcher
