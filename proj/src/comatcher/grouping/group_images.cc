#include "comatcher/grouping/group_images.h"

#include <algorithm>

#include "comatcher/core/error.h"

namespace comatcher {

double CovisibilityScore(int v, const std::vector<int>& members,
                         const OverlapGraph& graph) {
  const int degree = graph.Degree(v);
  if (degree == 0) {
    throw DataError("isolated-node", graph.ids()[v]);
  }
  double sum = 0.0;
  for (int u : members) {
    if (u != v && graph.HasEdge(v, u)) sum += graph.weight(v, u);
  }
  return sum / degree;
}

std::vector<Group> GroupImages(const OverlapGraph& graph,
                               const GroupingOptions& opt,
                               std::vector<InsertionRecord>* log) {
  if (!(opt.theta_min >= 0.0 && opt.theta_min < opt.theta_max &&
        opt.theta_max <= 1.0) ||
      opt.max_size < 1) {
    throw Error("invalid-config", "grouping thresholds", ErrorKind::kUsage);
  }
  const int n = graph.size();
  std::vector<char> assigned(n, 0);
  std::vector<Group> groups;
  int remaining = n;
  while (remaining > 0) {
    int seed = -1;
    for (int v = 0; v < n; ++v) {
      if (!assigned[v] && (seed < 0 || graph.Degree(v) > graph.Degree(seed))) {
        seed = v;
      }
    }
    Group g;
    g.seed = seed;
    g.members.push_back(seed);
    assigned[seed] = 1;
    --remaining;
    while (static_cast<int>(g.members.size()) < opt.max_size) {
      int best = -1;
      double best_score = 0.0;
      for (int v = 0; v < n; ++v) {
        if (assigned[v]) continue;
        const bool adjacent = std::any_of(
            g.members.begin(), g.members.end(),
            [&](int u) { return graph.HasEdge(v, u); });
        if (!adjacent) continue;
        const double s = CovisibilityScore(v, g.members, graph);
        if (s > opt.theta_min && s < opt.theta_max &&
            (best < 0 || s > best_score)) {
          best = v;
          best_score = s;
        }
      }
      if (best < 0) break;
      g.members.push_back(best);
      assigned[best] = 1;
      --remaining;
      if (log) {
        log->push_back({static_cast<int>(groups.size()), best, best_score});
      }
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

nlohmann::json GroupsToJson(const std::vector<Group>& groups,
                            const OverlapGraph& graph) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& g : groups) {
    nlohmann::json members = nlohmann::json::array();
    for (int m : g.members) members.push_back(graph.ids()[m]);
    list.push_back({{"seed", graph.ids()[g.seed]}, {"members", members}});
  }
  return {{"groups", list}};
}

std::vector<Group> GroupsFromJson(const nlohmann::json& j,
                                  const std::vector<std::string>& ids) {
  auto index = [&](const std::string& id) {
    auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) throw DataError("unknown-image", id);
    return static_cast<int>(it - ids.begin());
  };
  std::vector<Group> out;
  try {
    for (const auto& g : j.at("groups")) {
      Group group;
      group.seed = index(g.at("seed").get<std::string>());
      for (const auto& m : g.at("members")) {
        group.members.push_back(index(m.get<std::string>()));
      }
      if (group.members.empty() || group.members.front() != group.seed) {
        throw DataError("malformed-groups", "seed must lead members");
      }
      out.push_back(std::move(group));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed-groups", e.what());
  }
  return out;
}

}  // namespace comatcher
