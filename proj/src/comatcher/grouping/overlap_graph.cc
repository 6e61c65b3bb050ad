#include "comatcher/grouping/overlap_graph.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "comatcher/core/error.h"
#include "comatcher/core/parallel.h"

namespace comatcher {

OverlapGraph::OverlapGraph(std::vector<std::string> ids,
                           Eigen::MatrixXd weights, double edge_threshold)
    : ids_(std::move(ids)), weights_(std::move(weights)) {
  const int n = size();
  if (weights_.rows() != n || weights_.cols() != n) {
    throw DataError("invalid-graph", "weight matrix is not n x n");
  }
  edges_.assign(n, std::vector<char>(n, 0));
  degree_.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    if (weights_(i, i) != 0.0) throw DataError("invalid-graph", "diagonal");
    for (int j = 0; j < n; ++j) {
      const double w = weights_(i, j);
      if (!(w >= 0.0 && w <= 1.0) || w != weights_(j, i)) {
        throw DataError("invalid-graph", "weights must be symmetric in [0,1]");
      }
      if (i != j && w > edge_threshold) {
        edges_[i][j] = 1;
        ++degree_[i];
      }
    }
  }
}

std::vector<int> OverlapGraph::Neighbors(int v) const {
  std::vector<int> out;
  for (int u = 0; u < size(); ++u) {
    if (edges_[v][u]) out.push_back(u);
  }
  return out;
}

std::vector<std::pair<int, int>> OverlapGraph::Edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) {
      if (edges_[i][j]) out.emplace_back(i, j);
    }
  }
  return out;
}

namespace {

std::vector<std::string> Ids(const std::vector<ImageFeatures>& images) {
  std::vector<std::string> ids;
  for (const auto& f : images) ids.push_back(f.image_id);
  return ids;
}

double Ratio(size_t count, int na, int nb) {
  const int denom = std::min(na, nb);
  if (denom <= 0) return 0.0;
  return std::clamp(static_cast<double>(count) / denom, 0.0, 1.0);
}

}  // namespace

OverlapGraph BuildOverlapGraphFromLabels(
    const std::vector<ImageFeatures>& images,
    const std::map<std::string, std::vector<int>>& labels) {
  const int n = static_cast<int>(images.size());
  std::vector<std::set<int>> sets(n);
  for (int i = 0; i < n; ++i) {
    auto it = labels.find(images[i].image_id);
    if (it == labels.end()) {
      throw DataError("missing-labels", images[i].image_id);
    }
    for (int l : it->second) {
      if (l >= 0) sets[i].insert(l);
    }
  }
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      size_t shared = 0;
      for (int l : sets[i]) shared += sets[j].count(l);
      w(i, j) = w(j, i) = Ratio(shared, images[i].size(), images[j].size());
    }
  }
  return OverlapGraph(Ids(images), std::move(w));
}

OverlapGraph BuildOverlapGraphFromDescriptors(
    const std::vector<ImageFeatures>& images, int jobs) {
  const int n = static_cast<int>(images.size());
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> values(pairs.size());
  ParallelFor(pairs.size(), jobs, [&](size_t k) {
    const auto [i, j] = pairs[k];
    const auto m = MutualNearestNeighbors(images[i], images[j],
                                          kDescriptorOverlapSimilarity);
    values[k] = Ratio(m.size(), images[i].size(), images[j].size());
  });
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (size_t k = 0; k < pairs.size(); ++k) {
    w(pairs[k].first, pairs[k].second) = values[k];
    w(pairs[k].second, pairs[k].first) = values[k];
  }
  return OverlapGraph(Ids(images), std::move(w));
}

void WriteOverlapCsv(const std::string& path, const OverlapGraph& g) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw DataError("io-error", "cannot write " + path);
  for (int i = 0; i < g.size(); ++i) file << (i ? "," : "") << g.ids()[i];
  file << '\n';
  char buf[32];
  for (int i = 0; i < g.size(); ++i) {
    for (int j = 0; j < g.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", g.weight(i, j));
      file << (j ? "," : "") << buf;
    }
    file << '\n';
  }
}

OverlapGraph ReadOverlapCsv(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw DataError("io-error", "cannot read " + path);
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  std::string line;
  std::getline(file, line);
  const auto ids = split(line);
  const int n = static_cast<int>(ids.size());
  Eigen::MatrixXd w(n, n);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(file, line)) throw DataError("malformed-csv", path);
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) != n) {
      throw DataError("malformed-csv", path);
    }
    for (int j = 0; j < n; ++j) w(i, j) = std::stod(cells[j]);
  }
  return OverlapGraph(ids, std::move(w));
}

}  // namespace comatcher
