#pragma once

#include <string>
#include <vector>

#include "comatcher/grouping/overlap_graph.h"

namespace comatcher {

struct Group {
  int seed = 0;
  std::vector<int> members;  // insertion order, seed first
};

struct GroupingOptions {
  double theta_min = 0.3;
  double theta_max = 0.7;
  int max_size = 4;
};

// One accepted insertion: node joined `group` with `score`.
struct InsertionRecord {
  int group = 0;
  int node = 0;
  double score = 0.0;
};

// Sum of o[v][u] over members u adjacent to v, divided by the full-graph
// degree of v. Throws Error("isolated-node") when v has no edges.
double CovisibilityScore(int v, const std::vector<int>& members,
                         const OverlapGraph& graph);

// Greedy grouping: seed = unassigned node of largest degree, then repeatedly
// add the unassigned neighbour with the highest score strictly inside
// (theta_min, theta_max). Ties go to the smallest index.
std::vector<Group> GroupImages(const OverlapGraph& graph,
                               const GroupingOptions& options,
                               std::vector<InsertionRecord>* log = nullptr);

nlohmann::json GroupsToJson(const std::vector<Group>& groups,
                            const OverlapGraph& graph);
// Resolves ids against `ids`; throws "unknown-image" for missing ids.
std::vector<Group> GroupsFromJson(const nlohmann::json& j,
                                  const std::vector<std::string>& ids);

}  // namespace comatcher
