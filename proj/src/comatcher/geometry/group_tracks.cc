#include "comatcher/geometry/group_tracks.h"

#include <algorithm>

#include "comatcher/core/error.h"
#include "comatcher/core/union_find.h"

namespace comatcher {

GroupTracks GroupTracks::Empty(std::vector<int> num_points) {
  return Build(std::move(num_points), {});
}

GroupTracks GroupTracks::Build(std::vector<int> num_points,
                               PairMatchMap pair_matches) {
  GroupTracks out;
  out.num_points_ = std::move(num_points);
  const int views = out.num_views();
  std::vector<size_t> offset(views + 1, 0);
  for (int v = 0; v < views; ++v) {
    offset[v + 1] = offset[v] + static_cast<size_t>(out.num_points_[v]);
  }
  UnionFind sets(offset[views]);
  for (const auto& [key, matches] : pair_matches) {
    const auto [i, j] = key;
    if (i < 0 || j < 0 || i >= views || j >= views || i >= j) {
      throw Error("invalid-pair", "pair (" + std::to_string(i) + ", " +
                                      std::to_string(j) + ")");
    }
    for (const PointMatch& m : matches) {
      if (m.first < 0 || m.first >= out.num_points_[i] || m.second < 0 ||
          m.second >= out.num_points_[j]) {
        throw Error("index-out-of-range", "match outside keypoint range");
      }
      sets.Union(offset[i] + m.first, offset[j] + m.second);
    }
  }

  // Group nodes by root, visiting nodes in (view, point) order so track order
  // follows the first member.
  std::map<size_t, std::vector<std::pair<int, int>>> components;
  std::vector<size_t> order;
  for (int v = 0; v < views; ++v) {
    for (int p = 0; p < out.num_points_[v]; ++p) {
      const size_t root = sets.Find(offset[v] + p);
      auto [it, inserted] = components.try_emplace(root);
      if (inserted) order.push_back(root);
      it->second.emplace_back(v, p);
    }
  }
  out.point_track_.resize(views);
  for (int v = 0; v < views; ++v) {
    out.point_track_[v].assign(out.num_points_[v], -1);
  }
  for (size_t root : order) {
    const auto& members = components[root];
    if (members.size() < 2) continue;
    std::vector<int> track(views, -1);
    bool conflict = false;
    for (const auto& [v, p] : members) {
      if (track[v] != -1) {
        conflict = true;
        break;
      }
      track[v] = p;
    }
    if (conflict) continue;
    const int id = static_cast<int>(out.tracks_.size());
    for (const auto& [v, p] : members) out.point_track_[v][p] = id;
    out.tracks_.push_back(std::move(track));
  }
  out.pair_matches_ = std::move(pair_matches);
  return out;
}

int GroupTracks::TrackOf(int view, int point) const {
  if (view < 0 || view >= num_views() || point < 0 ||
      point >= num_points_[view]) {
    throw Error("index-out-of-range", "point not in group");
  }
  return point_track_[view][point];
}

std::optional<int> GroupTracks::Projection(int view, int point,
                                           int other_view) const {
  const int track = TrackOf(view, point);
  if (track < 0 || other_view < 0 || other_view >= num_views()) {
    return std::nullopt;
  }
  const int w = tracks_[track][other_view];
  if (w < 0) return std::nullopt;
  return w;
}

std::vector<std::pair<int, int>> GroupTracks::Partners(int view,
                                                       int point) const {
  std::vector<std::pair<int, int>> out;
  const int track = TrackOf(view, point);
  if (track < 0) return out;
  for (int v = 0; v < num_views(); ++v) {
    if (v != view && tracks_[track][v] >= 0) {
      out.emplace_back(v, tracks_[track][v]);
    }
  }
  return out;
}

GroupTracks GroupTracks::Restrict(const std::vector<int>& views) const {
  std::vector<int> local(num_views(), -1);
  GroupTracks out;
  for (size_t k = 0; k < views.size(); ++k) {
    if (views[k] < 0 || views[k] >= num_views() || local[views[k]] != -1) {
      throw Error("invalid-view", "bad view list for restriction");
    }
    local[views[k]] = static_cast<int>(k);
    out.num_points_.push_back(num_points_[views[k]]);
  }
  for (const auto& [key, matches] : pair_matches_) {
    int a = local[key.first];
    int b = local[key.second];
    if (a < 0 || b < 0) continue;
    std::vector<PointMatch> list = matches;
    if (a > b) {
      std::swap(a, b);
      for (auto& m : list) std::swap(m.first, m.second);
    }
    auto& dst = out.pair_matches_[{a, b}];
    dst.insert(dst.end(), list.begin(), list.end());
  }
  // Tracks keep their chains through views that are left out.
  out.point_track_.resize(views.size());
  for (size_t k = 0; k < views.size(); ++k) {
    out.point_track_[k].assign(out.num_points_[k], -1);
  }
  for (const auto& track : tracks_) {
    std::vector<int> sub(views.size(), -1);
    int members = 0;
    for (size_t k = 0; k < views.size(); ++k) {
      sub[k] = track[views[k]];
      members += sub[k] >= 0;
    }
    if (members < 2) continue;
    const int id = static_cast<int>(out.tracks_.size());
    for (size_t k = 0; k < views.size(); ++k) {
      if (sub[k] >= 0) out.point_track_[k][sub[k]] = id;
    }
    out.tracks_.push_back(std::move(sub));
  }
  return out;
}

PixelPoint RelativePosition(int u, int view_i, int v, int view_j,
                            const GroupTracks& tracks,
                            std::span<const PixelPoint> keypoints_j) {
  if (v < 0 || static_cast<size_t>(v) >= keypoints_j.size()) {
    throw Error("index-out-of-range", "target point of relative position");
  }
  const auto w = tracks.Projection(view_i, u, view_j);
  if (!w) return {0.0, 0.0};
  return keypoints_j[*w] - keypoints_j[v];
}

}  // namespace comatcher
