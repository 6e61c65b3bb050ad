#pragma once

#include <string>

#include <Eigen/Core>

namespace comatcher {

#ifdef COMATCHER_SINGLE_PRECISION
using Scalar = float;
#else
using Scalar = double;
#endif

// Dense row-major matrix used for every feature, weight and score array.
using Tensor2 =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

bool AllFinite(const Tensor2& t);

// Throws Error("shape-mismatch") naming `what` unless t is rows x cols.
// A negative expected extent matches anything.
void CheckShape(const Tensor2& t, Eigen::Index rows, Eigen::Index cols,
                const std::string& what);

std::string ShapeString(const Tensor2& t);

}  // namespace comatcher
