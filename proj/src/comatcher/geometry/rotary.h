#pragma once

#include "comatcher/core/tensor.h"
#include "comatcher/geometry/homography.h"

namespace comatcher {

// Learned rotary basis: row k is the 2-vector b_k that turns a relative
// position p into the rotation angle b_k . p of subspace (2k, 2k+1).
class RotaryBasis {
 public:
  // Throws Error("shape-mismatch") unless `basis` has two columns and
  // finite entries.
  explicit RotaryBasis(Tensor2 basis);

  Eigen::Index num_subspaces() const { return basis_.rows(); }
  Eigen::Index dim() const { return 2 * basis_.rows(); }
  const Tensor2& matrix() const { return basis_; }

  double Angle(Eigen::Index k, const PixelPoint& p) const {
    return basis_(k, 0) * p.x + basis_(k, 1) * p.y;
  }

 private:
  Tensor2 basis_;
};

// Applies the block-diagonal rotation R(delta): subspace k of v is rotated
// counter-clockwise by b_k . delta. Throws Error("odd-dimension") for odd
// length and Error("shape-mismatch") if the basis does not cover v.
VectorX RotaryApply(const RotaryBasis& basis, const PixelPoint& delta,
                    const VectorX& v);

// In-place rotation of the pair (x0, x1) by angle theta.
inline void RotatePair(Scalar theta, Scalar* x0, Scalar* x1) {
  const Scalar c = std::cos(theta);
  const Scalar s = std::sin(theta);
  const Scalar a = *x0;
  const Scalar b = *x1;
  *x0 = c * a - s * b;
  *x1 = s * a + c * b;
}

}  // namespace comatcher
