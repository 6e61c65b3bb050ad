#pragma once

#include <vector>

#include "comatcher/core/autodiff.h"

namespace comatcher {
namespace ad {

// Differentiable primitives. Every op records its value on the tape of its
// first argument and a closure that accumulates input gradients.

Var MatMul(Var a, Var b);      // a b
Var MatMulNT(Var a, Var b);    // a b^T
Var Transpose(Var a);
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Hadamard(Var a, Var b);
Var Scale(Var a, Scalar s);
Var AddRowBroadcast(Var a, Var row);  // a + 1 row
// Row r of `a` multiplied by the constant weights[r].
Var RowScale(Var a, const VectorX& weights);
// Row r of `a` multiplied by column[r] (column is N x 1).
Var ColumnMul(Var column, Var a);
// Rowwise dot product of two equally shaped matrices, N x 1.
Var RowDot(Var a, Var b);
Var ConcatCols(const std::vector<Var>& parts);
Var SliceCols(Var a, Eigen::Index start, Eigen::Index count);
Var Sum(Var a);
Var AddAll(const std::vector<Var>& terms);

Var RowSoftmax(Var a);
Var Sigmoid(Var a);
Var Gelu(Var a);
// Standardize each row, then scale by gamma and shift by beta (both 1 x n).
Var LayerNorm(Var a, Var gamma, Var beta);

// Linear map with bias: x W + b, W is in x out, b is 1 x out.
Var Linear(Var x, Var weight, Var bias);

// One clamped log-likelihood term per entry: sum_k coef_k * log(v_k) with
// v_k = a(row_k, col_k) or 1 - a(row_k, col_k) when `complement` is set, and
// v_k clamped to [kLogClamp, 1 - kLogClamp]. Clamped entries get no gradient.
inline constexpr double kLogClamp = 1e-12;
struct LogTerm {
  Eigen::Index row;
  Eigen::Index col;
  Scalar coef;
};
Var WeightedLogSum(Var a, std::vector<LogTerm> terms, bool complement);

}  // namespace ad
}  // namespace comatcher
