#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace comatcher {

struct PixelPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

inline PixelPoint operator-(const PixelPoint& a, const PixelPoint& b) {
  return {a.x - b.x, a.y - b.y};
}
inline PixelPoint operator+(const PixelPoint& a, const PixelPoint& b) {
  return {a.x + b.x, a.y + b.y};
}
double Distance(const PixelPoint& a, const PixelPoint& b);

// Projective map of the plane. The stored matrix is scaled so that
// h(2,2) = 1 when |h(2,2)| > 1e-12, otherwise to unit Frobenius norm, and is
// nonsingular after scaling.
class Homography {
 public:
  Homography() : h_(Eigen::Matrix3d::Identity()) {}

  // Throws Error("singular-homography") when |det| <= 1e-12 after scaling
  // or the matrix is not finite.
  static Homography FromMatrix(const Eigen::Matrix3d& m);
  static Homography FromArray(const std::array<double, 9>& row_major);
  static Homography Translation(double tx, double ty);

  const Eigen::Matrix3d& matrix() const { return h_; }
  std::array<double, 9> ToArray() const;
  Homography Inverse() const;

  // (a * b)(p) = a(b(p)).
  friend Homography operator*(const Homography& a, const Homography& b) {
    return FromMatrix(a.h_ * b.h_);
  }

 private:
  Eigen::Matrix3d h_;
};

// Throws Error("point-at-infinity") when the homogeneous depth |w| <= 1e-9.
PixelPoint ApplyHomography(const Homography& h, const PixelPoint& p);
std::optional<PixelPoint> TryApplyHomography(const Homography& h,
                                             const PixelPoint& p);

struct Correspondence {
  PixelPoint source;
  PixelPoint target;
};

// Weighted normalized DLT. Both point sets are Hartley-conditioned using the
// points with positive weight, each pair contributes two rows scaled by
// sqrt(weight), and the null vector of the stacked system is de-conditioned.
// Throws Error("degenerate-configuration") for fewer than four positively
// weighted correspondences, collinear point sets, or a rank-deficient system.
Homography DltHomography(std::span<const Correspondence> correspondences,
                         std::span<const double> weights);
Homography DltHomography(std::span<const Correspondence> correspondences);

// 1/2 (|h(p) - q| + |h^-1(q) - p|).
double SymmetricReprojectionError(const Homography& h, const PixelPoint& p,
                                  const PixelPoint& q);

// Mean distance between the images of the four frame corners
// (0,0), (w,0), (w,h), (0,h) under the two maps.
double CornerError(const Homography& estimate, const Homography& truth,
                   double width, double height);

struct RansacOptions {
  double inlier_threshold_px = 3.0;
  int max_iterations = 1000;
  uint64_t seed = 0;
  // Early exit once the best model is this likely to be found; 1 disables.
  double confidence = 0.9999;
};

struct RansacResult {
  Homography model;
  std::vector<char> inlier_mask;
  int num_inliers = 0;
  int num_trials = 0;
};

// Four-point RANSAC scored by symmetric reprojection error, followed by a DLT
// refit on the best inlier set. Trial k draws its sample from a generator
// derived from (seed, k); the winner is the lowest (-inliers, trial index).
// Throws Error("ransac-failure") if no model has at least four inliers.
RansacResult RansacHomography(std::span<const Correspondence> correspondences,
                              const RansacOptions& options);

}  // namespace comatcher
