#include "comatcher/core/kernels.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "comatcher/core/error.h"

namespace comatcher {

VectorX Softmax(const VectorX& v) {
  if (v.size() == 0) {
    throw Error("empty-softmax");
  }
  const Scalar max_value = v.maxCoeff();
  VectorX out = (v.array() - max_value).exp().matrix();
  out /= out.sum();
  return out;
}

Tensor2 RowSoftmax(const Tensor2& x) {
  if (x.cols() == 0) {
    throw Error("empty-softmax");
  }
  Tensor2 out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Scalar max_value = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - max_value).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

Scalar Sigmoid(Scalar x) {
  Scalar s;
  if (x >= 0) {
    s = Scalar(1) / (Scalar(1) + std::exp(-x));
  } else {
    const Scalar e = std::exp(x);
    s = e / (Scalar(1) + e);
  }
  constexpr Scalar kLow = std::numeric_limits<Scalar>::min();
  constexpr Scalar kHigh =
      Scalar(1) - std::numeric_limits<Scalar>::epsilon() / 2;
  return std::clamp(s, kLow, kHigh);
}

Scalar Gelu(Scalar x) {
  const Scalar inner = Scalar(kSqrtTwoOverPi) * (x + Scalar(kGeluCubic) * x * x * x);
  return Scalar(0.5) * x * (Scalar(1) + std::tanh(inner));
}

Scalar GeluDerivative(Scalar x) {
  const Scalar inner = Scalar(kSqrtTwoOverPi) * (x + Scalar(kGeluCubic) * x * x * x);
  const Scalar t = std::tanh(inner);
  const Scalar dinner =
      Scalar(kSqrtTwoOverPi) * (Scalar(1) + Scalar(3 * kGeluCubic) * x * x);
  return Scalar(0.5) * (Scalar(1) + t) + Scalar(0.5) * x * (Scalar(1) - t * t) * dinner;
}

Tensor2 StandardizeRows(const Tensor2& x, Scalar eps) {
  Tensor2 out(x.rows(), x.cols());
  const Scalar n = static_cast<Scalar>(x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Scalar mean = x.row(r).sum() / n;
    const auto centered = (x.row(r).array() - mean).matrix();
    const Scalar var = centered.squaredNorm() / n;
    out.row(r) = centered / std::sqrt(var + eps);
  }
  return out;
}

}  // namespace comatcher
