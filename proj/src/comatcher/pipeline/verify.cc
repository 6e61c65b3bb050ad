#include "comatcher/pipeline/verify.h"

#include <algorithm>

#include "comatcher/core/error.h"
#include "comatcher/geometry/homography.h"

namespace comatcher {

MatchSet GeometricVerify(const MatchSet& in, const ImageFeatures& source,
                         const ImageFeatures& target, double threshold_px,
                         uint64_t seed) {
  if (in.pairs.size() < 4) {
    MatchSet out = in;
    out.unverified = true;
    return out;
  }
  std::vector<Correspondence> corr;
  for (const auto& m : in.pairs) {
    if (m.u < 0 || m.u >= source.size() || m.x < 0 || m.x >= target.size()) {
      throw DataError("index-out-of-range",
                      source.image_id + " / " + target.image_id);
    }
    corr.push_back({source.keypoints[m.u], target.keypoints[m.x]});
  }
  std::vector<char> keep(corr.size(), 0);
  RansacOptions opt;
  opt.inlier_threshold_px = threshold_px;
  opt.seed = seed;
  try {
    keep = RansacHomography(corr, opt).inlier_mask;
  } catch (const Error& e) {
    if (e.code() != "ransac-failure" && e.code() != "degenerate-configuration") {
      throw;
    }
  }
  MatchSet out;
  out.unmatched_source = in.unmatched_source;
  out.unmatched_target = in.unmatched_target;
  for (size_t k = 0; k < in.pairs.size(); ++k) {
    if (keep[k]) {
      out.pairs.push_back(in.pairs[k]);
    } else {
      out.unmatched_source.push_back(in.pairs[k].u);
      out.unmatched_target.push_back(in.pairs[k].x);
    }
  }
  std::sort(out.unmatched_source.begin(), out.unmatched_source.end());
  std::sort(out.unmatched_target.begin(), out.unmatched_target.end());
  return out;
}

}  // namespace comatcher
