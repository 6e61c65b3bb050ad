#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "comatcher/geometry/homography.h"

namespace comatcher {

struct PointMatch {
  int first = 0;   // point index in the lower-numbered view
  int second = 0;  // point index in the higher-numbered view

  friend bool operator==(const PointMatch&, const PointMatch&) = default;
  friend auto operator<=>(const PointMatch&, const PointMatch&) = default;
};

// Matches between views (i, j) with i < j, keyed by local view index.
using PairMatchMap = std::map<std::pair<int, int>, std::vector<PointMatch>>;

// Correspondence structure inside one image group: the pairwise match lists
// and the tracks obtained by chaining them. A track lists at most one point
// per view; chains that would place two points of one view in the same track
// are dropped entirely.
class GroupTracks {
 public:
  GroupTracks() = default;

  // num_points[v] is the keypoint count of view v.
  static GroupTracks Build(std::vector<int> num_points,
                           PairMatchMap pair_matches);
  static GroupTracks Empty(std::vector<int> num_points);

  int num_views() const { return static_cast<int>(num_points_.size()); }
  const std::vector<int>& num_points() const { return num_points_; }
  const PairMatchMap& pair_matches() const { return pair_matches_; }
  // tracks()[k][v] is the point of track k in view v, or -1.
  const std::vector<std::vector<int>>& tracks() const { return tracks_; }

  // Track containing (view, point), or -1.
  int TrackOf(int view, int point) const;
  // Point of the same track in other_view, if any.
  std::optional<int> Projection(int view, int point, int other_view) const;
  // All other (view, point) members of the track containing (view, point).
  std::vector<std::pair<int, int>> Partners(int view, int point) const;

  // Sub-group over the listed views, re-indexed in the listed order. Tracks
  // are projected, not rebuilt, so chains through dropped views survive.
  GroupTracks Restrict(const std::vector<int>& views) const;

 private:
  std::vector<int> num_points_;
  PairMatchMap pair_matches_;
  std::vector<std::vector<int>> tracks_;
  std::vector<std::vector<int>> point_track_;
};

// Relative position of point v of view j as seen from point u of view i:
// p_w - p_v where w is u's track partner in view j, or (0, 0) when u has no
// partner there.
PixelPoint RelativePosition(int u, int view_i, int v, int view_j,
                            const GroupTracks& tracks,
                            std::span<const PixelPoint> keypoints_j);

}  // namespace comatcher
