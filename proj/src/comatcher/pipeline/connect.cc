#include "comatcher/pipeline/connect.h"

#include <algorithm>

#include "comatcher/core/random.h"
#include "comatcher/pipeline/verify.h"

namespace comatcher {

MatchSet DescriptorMatches(const ImageFeatures& a, const ImageFeatures& b,
                           double min_similarity) {
  MatchSet out;
  std::vector<char> used_a(a.size(), 0), used_b(b.size(), 0);
  for (const auto& m : MutualNearestNeighbors(a, b, min_similarity)) {
    out.pairs.push_back({m.a, m.b, m.similarity});
    used_a[m.a] = 1;
    used_b[m.b] = 1;
  }
  for (int u = 0; u < a.size(); ++u) {
    if (!used_a[u]) out.unmatched_source.push_back(u);
  }
  for (int x = 0; x < b.size(); ++x) {
    if (!used_b[x]) out.unmatched_target.push_back(x);
  }
  return out;
}

namespace {

MatchSet DropAll(const MatchSet& m) {
  MatchSet out;
  out.unmatched_source = m.unmatched_source;
  out.unmatched_target = m.unmatched_target;
  for (const auto& p : m.pairs) {
    out.unmatched_source.push_back(p.u);
    out.unmatched_target.push_back(p.x);
  }
  std::sort(out.unmatched_source.begin(), out.unmatched_source.end());
  std::sort(out.unmatched_target.begin(), out.unmatched_target.end());
  return out;
}

}  // namespace

GroupTracks ConnectGroup(const std::vector<const ImageFeatures*>& views,
                         const ConnectOptions& opt,
                         std::vector<std::string>* log,
                         std::map<std::pair<int, int>, MatchSet>* pair_sets) {
  const int n = static_cast<int>(views.size());
  std::vector<int> counts;
  for (const auto* v : views) counts.push_back(v->size());
  PairMatchMap pm;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const MatchSet raw =
          DescriptorMatches(*views[i], *views[j], opt.min_similarity);
      const uint64_t seed = SplitMix64(opt.seed ^ SplitMix64(i * 1000003ULL + j));
      MatchSet kept =
          GeometricVerify(raw, *views[i], *views[j], opt.inlier_px, seed);
      if (kept.unverified ||
          static_cast<int>(kept.pairs.size()) < opt.min_inliers) {
        if (log && !raw.pairs.empty()) {
          log->push_back("connect " + views[i]->image_id + " / " +
                         views[j]->image_id + ": verification failed");
        }
        if (pair_sets) (*pair_sets)[{i, j}] = DropAll(kept);
        continue;
      }
      if (pair_sets) (*pair_sets)[{i, j}] = kept;
      auto& list = pm[{i, j}];
      for (const auto& m : kept.pairs) list.push_back({m.u, m.x});
    }
  }
  return GroupTracks::Build(std::move(counts), std::move(pm));
}

}  // namespace comatcher
