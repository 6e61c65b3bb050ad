#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "comatcher/features/image_features.h"

namespace comatcher {

inline constexpr double kEdgeThreshold = 0.05;
inline constexpr double kDescriptorOverlapSimilarity = 0.8;

// Symmetric co-visibility weights with zero diagonal. An edge exists iff its
// weight exceeds the edge threshold.
class OverlapGraph {
 public:
  OverlapGraph() = default;
  // Throws Error("invalid-graph") for non-square, asymmetric, out-of-range or
  // nonzero-diagonal weights.
  OverlapGraph(std::vector<std::string> ids, Eigen::MatrixXd weights,
               double edge_threshold = kEdgeThreshold);

  int size() const { return static_cast<int>(ids_.size()); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  double weight(int i, int j) const { return weights_(i, j); }
  bool HasEdge(int i, int j) const { return edges_[i][j] != 0; }
  int Degree(int v) const { return degree_[v]; }
  std::vector<int> Neighbors(int v) const;
  // (i, j) with i < j, lexicographic.
  std::vector<std::pair<int, int>> Edges() const;

 private:
  std::vector<std::string> ids_;
  Eigen::MatrixXd weights_;
  std::vector<std::vector<char>> edges_;
  std::vector<int> degree_;
};

// Weight = shared world labels / min(N_i, N_j).
OverlapGraph BuildOverlapGraphFromLabels(
    const std::vector<ImageFeatures>& images,
    const std::map<std::string, std::vector<int>>& labels);

// Weight = mutual nearest neighbours with similarity above 0.8, divided by
// min(N_i, N_j). Pairs are evaluated on up to `jobs` threads.
OverlapGraph BuildOverlapGraphFromDescriptors(
    const std::vector<ImageFeatures>& images, int jobs = 1);

// CSV: header row of ids, then one row of weights per image.
void WriteOverlapCsv(const std::string& path, const OverlapGraph& graph);
OverlapGraph ReadOverlapCsv(const std::string& path);

}  // namespace comatcher
