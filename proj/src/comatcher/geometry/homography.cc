#include "comatcher/geometry/homography.h"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "comatcher/core/error.h"
#include "comatcher/core/random.h"

namespace comatcher {
namespace {

constexpr double kMinDepth = 1e-9;

// Similarity transform moving the centroid to the origin and scaling the mean
// distance to sqrt(2).
Eigen::Matrix3d ConditioningTransform(const std::vector<PixelPoint>& points) {
  double cx = 0.0;
  double cy = 0.0;
  for (const auto& p : points) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(points.size());
  cy /= static_cast<double>(points.size());
  double mean_dist = 0.0;
  for (const auto& p : points) {
    mean_dist += std::hypot(p.x - cx, p.y - cy);
  }
  mean_dist /= static_cast<double>(points.size());
  if (!(mean_dist > 0.0)) {
    throw NumericError("degenerate-configuration", "coincident points");
  }
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
  return t;
}

bool AllCollinear(const std::vector<PixelPoint>& points) {
  // Second singular value of the centered cloud relative to the first.
  Eigen::MatrixXd centered(points.size(), 2);
  double cx = 0.0;
  double cy = 0.0;
  for (const auto& p : points) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(points.size());
  cy /= static_cast<double>(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    centered(i, 0) = points[i].x - cx;
    centered(i, 1) = points[i].y - cy;
  }
  const Eigen::Vector2d sv =
      Eigen::JacobiSVD<Eigen::MatrixXd>(centered).singularValues();
  return !(sv(1) > 1e-9 * sv(0));
}

bool ThreeCollinear(const PixelPoint& a, const PixelPoint& b,
                    const PixelPoint& c) {
  const double ux = b.x - a.x;
  const double uy = b.y - a.y;
  const double vx = c.x - a.x;
  const double vy = c.y - a.y;
  const double cross = std::abs(ux * vy - uy * vx);
  return cross <= 1e-6 * std::hypot(ux, uy) * std::hypot(vx, vy);
}

bool SampleIsDegenerate(const std::array<PixelPoint, 4>& q) {
  for (int skip = 0; skip < 4; ++skip) {
    std::array<PixelPoint, 3> t;
    int k = 0;
    for (int i = 0; i < 4; ++i) {
      if (i != skip) t[k++] = q[i];
    }
    if (ThreeCollinear(t[0], t[1], t[2])) return true;
  }
  return false;
}

double SymmetricErrorOrInf(const Homography& h, const Homography& h_inv,
                           const PixelPoint& p, const PixelPoint& q) {
  const auto fwd = TryApplyHomography(h, p);
  const auto bwd = TryApplyHomography(h_inv, q);
  if (!fwd || !bwd) {
    return std::numeric_limits<double>::infinity();
  }
  return 0.5 * (Distance(*fwd, q) + Distance(*bwd, p));
}

int CountInliers(const Homography& h,
                 std::span<const Correspondence> correspondences,
                 double threshold, std::vector<char>* mask) {
  const Homography h_inv = h.Inverse();
  int count = 0;
  if (mask != nullptr) mask->assign(correspondences.size(), 0);
  for (size_t i = 0; i < correspondences.size(); ++i) {
    const double e = SymmetricErrorOrInf(h, h_inv, correspondences[i].source,
                                          correspondences[i].target);
    if (e <= threshold) {
      ++count;
      if (mask != nullptr) (*mask)[i] = 1;
    }
  }
  return count;
}

}  // namespace

double Distance(const PixelPoint& a, const PixelPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

Homography Homography::FromMatrix(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) {
    throw NumericError("singular-homography", "non-finite entries");
  }
  Homography h;
  if (std::abs(m(2, 2)) > 1e-12) {
    h.h_ = m / m(2, 2);
  } else {
    const double norm = m.norm();
    if (!(norm > 0.0)) {
      throw NumericError("singular-homography", "zero matrix");
    }
    h.h_ = m / norm;
  }
  if (!(std::abs(h.h_.determinant()) > 1e-12)) {
    throw NumericError("singular-homography");
  }
  return h;
}

Homography Homography::FromArray(const std::array<double, 9>& row_major) {
  Eigen::Matrix3d m;
  m << row_major[0], row_major[1], row_major[2], row_major[3], row_major[4],
      row_major[5], row_major[6], row_major[7], row_major[8];
  return FromMatrix(m);
}

Homography Homography::Translation(double tx, double ty) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = tx;
  m(1, 2) = ty;
  return FromMatrix(m);
}

std::array<double, 9> Homography::ToArray() const {
  std::array<double, 9> out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[3 * r + c] = h_(r, c);
  }
  return out;
}

Homography Homography::Inverse() const { return FromMatrix(h_.inverse()); }

std::optional<PixelPoint> TryApplyHomography(const Homography& h,
                                             const PixelPoint& p) {
  const Eigen::Matrix3d& m = h.matrix();
  const double w = m(2, 0) * p.x + m(2, 1) * p.y + m(2, 2);
  if (!(std::abs(w) > kMinDepth)) {
    return std::nullopt;
  }
  return PixelPoint{(m(0, 0) * p.x + m(0, 1) * p.y + m(0, 2)) / w,
                    (m(1, 0) * p.x + m(1, 1) * p.y + m(1, 2)) / w};
}

PixelPoint ApplyHomography(const Homography& h, const PixelPoint& p) {
  const auto q = TryApplyHomography(h, p);
  if (!q) {
    throw NumericError("point-at-infinity");
  }
  return *q;
}

Homography DltHomography(std::span<const Correspondence> correspondences,
                         std::span<const double> weights) {
  if (weights.size() != correspondences.size()) {
    throw Error("shape-mismatch", "one weight per correspondence required");
  }
  std::vector<PixelPoint> src;
  std::vector<PixelPoint> dst;
  std::vector<double> w;
  for (size_t i = 0; i < correspondences.size(); ++i) {
    if (weights[i] < 0.0 || !std::isfinite(weights[i])) {
      throw Error("invalid-weight", "weights must be finite and nonnegative");
    }
    if (weights[i] > 0.0) {
      src.push_back(correspondences[i].source);
      dst.push_back(correspondences[i].target);
      w.push_back(weights[i]);
    }
  }
  if (src.size() < 4) {
    throw NumericError("degenerate-configuration",
                       "fewer than four weighted correspondences");
  }
  if (AllCollinear(src) || AllCollinear(dst)) {
    throw NumericError("degenerate-configuration", "collinear points");
  }

  const Eigen::Matrix3d t_src = ConditioningTransform(src);
  const Eigen::Matrix3d t_dst = ConditioningTransform(dst);

  // At least nine rows so the full singular spectrum is available.
  const Eigen::Index rows =
      std::max<Eigen::Index>(9, 2 * static_cast<Eigen::Index>(src.size()));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, 9);
  for (size_t i = 0; i < src.size(); ++i) {
    const Eigen::Vector3d p = t_src * Eigen::Vector3d(src[i].x, src[i].y, 1.0);
    const Eigen::Vector3d q = t_dst * Eigen::Vector3d(dst[i].x, dst[i].y, 1.0);
    const double s = std::sqrt(w[i]);
    const double x = p.x() / p.z();
    const double y = p.y() / p.z();
    const double u = q.x() / q.z();
    const double v = q.y() / q.z();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    a.row(2 * i) *= s;
    a.row(2 * i + 1) *= s;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (!(sv(7) > 1e-9 * sv(0))) {
    throw NumericError("degenerate-configuration", "rank-deficient system");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return Homography::FromMatrix(t_dst.inverse() * hn * t_src);
}

Homography DltHomography(std::span<const Correspondence> correspondences) {
  const std::vector<double> ones(correspondences.size(), 1.0);
  return DltHomography(correspondences, ones);
}

double SymmetricReprojectionError(const Homography& h, const PixelPoint& p,
                                  const PixelPoint& q) {
  const PixelPoint fwd = ApplyHomography(h, p);
  const PixelPoint bwd = ApplyHomography(h.Inverse(), q);
  return 0.5 * (Distance(fwd, q) + Distance(bwd, p));
}

double CornerError(const Homography& estimate, const Homography& truth,
                   double width, double height) {
  const PixelPoint corners[4] = {
      {0.0, 0.0}, {width, 0.0}, {width, height}, {0.0, height}};
  double total = 0.0;
  for (const auto& c : corners) {
    total += Distance(ApplyHomography(estimate, c), ApplyHomography(truth, c));
  }
  return total / 4.0;
}

RansacResult RansacHomography(std::span<const Correspondence> correspondences,
                              const RansacOptions& options) {
  const size_t n = correspondences.size();
  if (n < 4) {
    throw NumericError("ransac-failure", "fewer than four correspondences");
  }
  if (!(options.inlier_threshold_px > 0.0)) {
    throw Error("invalid-threshold", "inlier threshold must be positive");
  }

  int best_inliers = -1;
  int best_trial = -1;
  Homography best_model;
  int trials = 0;
  long required = options.max_iterations;
  const long max_attempts = 10L * options.max_iterations;
  for (long attempt = 0; attempt < max_attempts && trials < required;
       ++attempt) {
    std::mt19937_64 rng = MakeRng(options.seed, static_cast<uint64_t>(attempt));
    std::array<size_t, 4> idx;
    for (int k = 0; k < 4; ++k) {
      bool fresh = false;
      while (!fresh) {
        idx[k] = std::uniform_int_distribution<size_t>(0, n - 1)(rng);
        fresh = std::find(idx.begin(), idx.begin() + k, idx[k]) ==
                idx.begin() + k;
      }
    }
    std::array<PixelPoint, 4> src;
    std::array<PixelPoint, 4> dst;
    std::array<Correspondence, 4> sample;
    for (int k = 0; k < 4; ++k) {
      sample[k] = correspondences[idx[k]];
      src[k] = sample[k].source;
      dst[k] = sample[k].target;
    }
    if (SampleIsDegenerate(src) || SampleIsDegenerate(dst)) {
      continue;
    }
    const int trial = trials++;
    Homography model;
    try {
      model = DltHomography(sample);
    } catch (const Error&) {
      continue;
    }
    const int inliers =
        CountInliers(model, correspondences, options.inlier_threshold_px,
                     nullptr);
    if (inliers > best_inliers) {
      best_inliers = inliers;
      best_trial = trial;
      best_model = model;
      if (options.confidence < 1.0) {
        const double ratio =
            static_cast<double>(inliers) / static_cast<double>(n);
        const double p_good = std::pow(ratio, 4.0);
        if (p_good >= 1.0) {
          required = std::min<long>(required, trials);
        } else if (p_good > 0.0) {
          const double needed =
              std::log(1.0 - options.confidence) / std::log(1.0 - p_good);
          required = std::min<long>(
              required, static_cast<long>(std::ceil(std::max(needed, 1.0))));
        }
      }
    }
  }
  (void)best_trial;
  if (best_inliers < 4) {
    throw NumericError("ransac-failure", "no model with four inliers");
  }

  RansacResult result;
  result.num_trials = trials;
  std::vector<char> mask;
  CountInliers(best_model, correspondences, options.inlier_threshold_px, &mask);
  std::vector<Correspondence> inlier_set;
  for (size_t i = 0; i < n; ++i) {
    if (mask[i]) inlier_set.push_back(correspondences[i]);
  }
  result.model = best_model;
  try {
    const Homography refit = DltHomography(inlier_set);
    std::vector<char> refit_mask;
    const int refit_inliers = CountInliers(
        refit, correspondences, options.inlier_threshold_px, &refit_mask);
    if (refit_inliers >= best_inliers) {
      result.model = refit;
    }
  } catch (const Error&) {
    // Keep the minimal-sample model.
  }
  result.num_inliers = CountInliers(result.model, correspondences,
                                    options.inlier_threshold_px,
                                    &result.inlier_mask);
  if (result.num_inliers < 4) {
    throw NumericError("ransac-failure", "refit lost its inliers");
  }
  return result;
}

}  // namespace comatcher
