#include "comatcher/eval/metrics.h"

#include <cmath>
#include <set>

#include "comatcher/core/error.h"

namespace comatcher {

PrecisionRecall ComputePrecisionRecall(const MatchSet& pred,
                                       const GtLabels& gt) {
  std::set<std::pair<int, int>> truth(gt.matches.begin(), gt.matches.end());
  std::set<int> labeled_u(gt.unmatched_source.begin(),
                          gt.unmatched_source.end());
  std::set<int> labeled_x(gt.unmatched_target.begin(),
                          gt.unmatched_target.end());
  for (const auto& [u, x] : gt.matches) {
    labeled_u.insert(u);
    labeled_x.insert(x);
  }
  PrecisionRecall r;
  r.gt = static_cast<int>(truth.size());
  for (const auto& m : pred.pairs) {
    if (truth.count({m.u, m.x})) {
      ++r.correct;
      ++r.considered;
    } else if (labeled_u.count(m.u) || labeled_x.count(m.x)) {
      ++r.considered;
    }
  }
  return Pool({r});
}

PrecisionRecall Pool(const std::vector<PrecisionRecall>& parts) {
  PrecisionRecall r;
  for (const auto& p : parts) {
    r.correct += p.correct;
    r.considered += p.considered;
    r.gt += p.gt;
  }
  r.precision_empty = r.considered == 0;
  r.recall_empty = r.gt == 0;
  r.precision = r.precision_empty ? 1.0 : double(r.correct) / r.considered;
  r.recall = r.recall_empty ? 1.0 : double(r.correct) / r.gt;
  return r;
}

std::vector<double> CornerAuc(const std::vector<double>& errors,
                              const std::vector<double>& thresholds) {
  if (errors.empty()) throw DataError("empty-eval", "no error samples");
  for (double e : errors) {
    if (!(e >= 0)) throw DataError("invalid-error", std::to_string(e));
  }
  std::vector<double> out;
  for (double t : thresholds) {
    if (!(t > 0)) throw Error("invalid-threshold", std::to_string(t),
                              ErrorKind::kUsage);
    double sum = 0;
    for (double e : errors) sum += std::max(0.0, 1.0 - std::min(e, t) / t);
    out.push_back(sum / static_cast<double>(errors.size()));
  }
  return out;
}

TrackStats ComputeTrackStats(const std::vector<GlobalTrack>& tracks) {
  TrackStats s;
  s.num_landmarks = static_cast<int>(tracks.size());
  if (tracks.empty()) return s;
  double total = 0;
  for (const auto& t : tracks) total += static_cast<double>(t.entries.size());
  s.mean_track_length = total / static_cast<double>(tracks.size());
  return s;
}

}  // namespace comatcher
