#include "comatcher/geometry/rotary.h"

#include <cmath>

#include "comatcher/core/error.h"

namespace comatcher {

RotaryBasis::RotaryBasis(Tensor2 basis) : basis_(std::move(basis)) {
  CheckShape(basis_, -1, 2, "rotary basis");
  if (!basis_.allFinite()) {
    throw Error("nonfinite-basis");
  }
}

VectorX RotaryApply(const RotaryBasis& basis, const PixelPoint& delta,
                    const VectorX& v) {
  if (v.size() % 2 != 0) {
    throw Error("odd-dimension", "length " + std::to_string(v.size()));
  }
  if (v.size() != basis.dim()) {
    throw Error("shape-mismatch", "rotary basis covers " +
                                      std::to_string(basis.dim()) +
                                      " dims, vector has " +
                                      std::to_string(v.size()));
  }
  VectorX out = v;
  for (Eigen::Index k = 0; k < basis.num_subspaces(); ++k) {
    RotatePair(static_cast<Scalar>(basis.Angle(k, delta)), &out(2 * k),
               &out(2 * k + 1));
  }
  return out;
}

}  // namespace comatcher
