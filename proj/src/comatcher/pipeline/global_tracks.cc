#include "comatcher/pipeline/global_tracks.h"

#include <algorithm>
#include <map>

#include "comatcher/core/error.h"
#include "comatcher/core/union_find.h"
#include "comatcher/features/image_features.h"

namespace comatcher {

std::vector<GlobalTrack> MergeTracks(const std::vector<PairMatches>& all) {
  std::map<std::pair<std::string, int>, size_t> node_index;
  std::vector<std::pair<std::string, int>> nodes;
  auto node = [&](const std::string& id, int p) {
    auto [it, inserted] = node_index.try_emplace({id, p}, nodes.size());
    if (inserted) nodes.emplace_back(id, p);
    return it->second;
  };
  std::vector<std::pair<size_t, size_t>> links;
  for (const auto& pm : all) {
    for (const auto& m : pm.matches.pairs) {
      links.emplace_back(node(pm.source_id, m.u), node(pm.target_id, m.x));
    }
  }
  UnionFind uf(nodes.size());
  for (const auto& [a, b] : links) uf.Union(a, b);

  std::map<size_t, std::vector<size_t>> components;
  for (size_t k = 0; k < nodes.size(); ++k) components[uf.Find(k)].push_back(k);
  std::vector<GlobalTrack> out;
  for (const auto& [root, members] : components) {
    if (members.size() < 2) continue;
    GlobalTrack t;
    for (size_t k : members) t.entries.push_back(nodes[k]);
    std::sort(t.entries.begin(), t.entries.end());
    bool conflict = false;
    for (size_t k = 1; k < t.entries.size(); ++k) {
      conflict |= t.entries[k].first == t.entries[k - 1].first;
    }
    if (!conflict) out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(),
            [](const GlobalTrack& a, const GlobalTrack& b) {
              return a.entries.front() < b.entries.front();
            });
  return out;
}

std::vector<PairMatches> TrackPairMatches(
    const std::vector<GlobalTrack>& tracks) {
  std::map<std::pair<std::string, std::string>, MatchSet> by_pair;
  for (const auto& t : tracks) {
    for (size_t a = 0; a < t.entries.size(); ++a) {
      for (size_t b = a + 1; b < t.entries.size(); ++b) {
        by_pair[{t.entries[a].first, t.entries[b].first}].pairs.push_back(
            {t.entries[a].second, t.entries[b].second, 1.0});
      }
    }
  }
  std::vector<PairMatches> out;
  for (auto& [ids, set] : by_pair) {
    std::sort(set.pairs.begin(), set.pairs.end(),
              [](const ScoredMatch& a, const ScoredMatch& b) { return a.u < b.u; });
    out.push_back({ids.first, ids.second, std::move(set)});
  }
  return out;
}

void WriteTracksFile(const std::string& path,
                     const std::vector<GlobalTrack>& tracks) {
  std::vector<nlohmann::json> lines;
  for (size_t k = 0; k < tracks.size(); ++k) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [id, p] : tracks[k].entries) {
      entries.push_back(nlohmann::json::array({id, p}));
    }
    lines.push_back({{"track_id", k}, {"entries", entries}});
  }
  WriteJsonLines(path, lines);
}

std::vector<GlobalTrack> ReadTracksFile(const std::string& path) {
  std::vector<GlobalTrack> out;
  for (const auto& j : ReadJsonLines(path)) {
    try {
      GlobalTrack t;
      for (const auto& e : j.at("entries")) {
        t.entries.emplace_back(e.at(0).get<std::string>(), e.at(1).get<int>());
      }
      out.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("bad-json", path + ": " + e.what());
    }
  }
  return out;
}

}  // namespace comatcher
