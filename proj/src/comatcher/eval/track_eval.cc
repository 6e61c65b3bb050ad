#include "comatcher/eval/track_eval.h"

#include <algorithm>

#include "comatcher/core/error.h"
#include "comatcher/core/random.h"

namespace comatcher {

std::vector<GlobalTrack> GroundTruthTracks(
    const std::vector<ImageFeatures>& images, const ImageLabels& labels) {
  std::map<int, GlobalTrack> by_label;
  for (const auto& f : images) {
    const auto it = labels.find(f.image_id);
    if (it == labels.end()) throw DataError("missing-labels", f.image_id);
    for (int k = 0; k < f.size(); ++k) {
      if (it->second[k] >= 0) {
        by_label[it->second[k]].entries.emplace_back(f.image_id, k);
      }
    }
  }
  std::vector<GlobalTrack> out;
  for (auto& [label, t] : by_label) {
    if (t.entries.size() < 2) continue;
    std::sort(t.entries.begin(), t.entries.end());
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(),
            [](const GlobalTrack& a, const GlobalTrack& b) {
              return a.entries.front() < b.entries.front();
            });
  return out;
}

double TrackPrecision(const std::vector<GlobalTrack>& tracks,
                      const ImageLabels& labels) {
  long good = 0, total = 0;
  auto label = [&](const std::pair<std::string, int>& e) {
    const auto it = labels.find(e.first);
    if (it == labels.end()) throw DataError("missing-labels", e.first);
    return it->second.at(e.second);
  };
  for (const auto& t : tracks) {
    for (size_t a = 0; a < t.entries.size(); ++a) {
      for (size_t b = a + 1; b < t.entries.size(); ++b) {
        ++total;
        const int la = label(t.entries[a]);
        good += la >= 0 && la == label(t.entries[b]);
      }
    }
  }
  return total == 0 ? 1.0 : double(good) / double(total);
}

std::vector<PairMatches> CorruptMatches(
    const std::vector<PairMatches>& matches,
    const std::map<std::string, int>& counts, double rate, uint64_t seed) {
  std::vector<PairMatches> out = matches;
  for (size_t k = 0; k < out.size(); ++k) {
    auto rng = MakeRng(seed, k);
    const int n = counts.at(out[k].target_id);
    for (auto& m : out[k].matches.pairs) {
      if (UniformReal(rng, 0, 1) >= rate || n < 2) continue;
      int x = UniformInt(rng, 0, n - 2);
      if (x >= m.x) ++x;
      m.x = x;
    }
  }
  return out;
}

}  // namespace comatcher
