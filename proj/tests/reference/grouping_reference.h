#pragma once

#include <set>
#include <vector>

#include <Eigen/Core>

namespace comatcher::reference {

// Step-by-step transcription of the greedy grouping pseudocode working
// directly on a weight matrix.
inline std::vector<std::vector<int>> SimulateGrouping(const Eigen::MatrixXd& o,
                                                      double edge_threshold,
                                                      double theta_min,
                                                      double theta_max,
                                                      int n_max) {
  const int n = static_cast<int>(o.rows());
  auto exists = [&](int a, int b) { return a != b && o(a, b) > edge_threshold; };
  std::vector<int> d(n, 0);
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u) d[v] += exists(v, u);
  }
  std::set<int> unassigned;
  for (int v = 0; v < n; ++v) unassigned.insert(v);
  std::vector<std::vector<int>> groups;
  while (!unassigned.empty()) {
    int i = *unassigned.begin();
    for (int v : unassigned) {
      if (d[v] > d[i]) i = v;
    }
    std::vector<int> g = {i};
    unassigned.erase(i);
    int count = 1;
    while (count < n_max) {
      std::vector<std::pair<int, double>> scores;
      for (int v : unassigned) {
        bool touches = false;
        for (int u : g) touches = touches || exists(v, u);
        if (!touches) continue;
        double sum = 0;
        for (int u : g) {
          if (exists(v, u)) sum += o(v, u);
        }
        scores.emplace_back(v, sum / d[v]);
      }
      std::vector<std::pair<int, double>> c;
      for (const auto& s : scores) {
        if (theta_min < s.second && s.second < theta_max) c.push_back(s);
      }
      if (c.empty()) break;
      auto j = c.front();
      for (const auto& s : c) {
        if (s.second > j.second) j = s;
      }
      g.push_back(j.first);
      unassigned.erase(j.first);
      ++count;
    }
    groups.push_back(g);
  }
  return groups;
}

}  // namespace comatcher::reference
