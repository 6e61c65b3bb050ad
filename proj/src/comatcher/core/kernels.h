#pragma once

#include "comatcher/core/tensor.h"

namespace comatcher {

// Max-subtracted softmax. Throws Error("empty-softmax") on empty input.
VectorX Softmax(const VectorX& v);
Tensor2 RowSoftmax(const Tensor2& x);

// Logistic function, clamped into the open interval (0, 1).
Scalar Sigmoid(Scalar x);

// tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
inline constexpr double kGeluCubic = 0.044715;
inline constexpr double kSqrtTwoOverPi = 0.79788456080286535588;
Scalar Gelu(Scalar x);
Scalar GeluDerivative(Scalar x);

// Per-row standardization (x - mean) / sqrt(var + eps), no scale or shift.
inline constexpr double kLayerNormEps = 1e-9;
Tensor2 StandardizeRows(const Tensor2& x, Scalar eps = kLayerNormEps);

}  // namespace comatcher
