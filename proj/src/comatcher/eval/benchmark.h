#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "comatcher/core/param_store.h"
#include "comatcher/eval/metrics.h"
#include "comatcher/eval/stats.h"
#include "comatcher/features/synthetic_scene.h"
#include "comatcher/net/net_config.h"

namespace comatcher {

enum class MatcherKind { kLearned, kDescriptor };

struct MatcherConfig {
  std::string name = "full";
  MatcherKind kind = MatcherKind::kLearned;
  AblationSwitches ablation;
  // Sources matched together; 1 reduces to independent two-view matching.
  int group_size = 4;
  double min_similarity = 0.75;  // descriptor matcher only
};

// The full model and the three component ablations.
std::vector<MatcherConfig> AblationMatchers(int group_size);

struct BenchmarkConfig {
  SceneConfig scene;  // scene.num_sources sources, view M is the target
  std::vector<uint64_t> seeds;
  std::vector<MatcherConfig> matchers;
  NetConfig net;
  std::string checkpoint_path;  // hashed into the report when set
  int jobs = 1;
};

struct EvalReport {
  std::string matcher;
  uint64_t seed = 0;
  PrecisionRecall pr;
  std::vector<double> auc;  // corner AUC at 1, 3, 5 px over source pairs
  TrackStats tracks;
};

struct MatcherSummary {
  std::string matcher;
  MeanStd precision, recall, auc1, auc3, auc5, nl, tl;
};

struct BenchmarkResult {
  std::vector<EvalReport> reports;  // matcher-major, seeds ascending
  std::vector<MatcherSummary> summary;
  std::string config_hash;
  std::string checkpoint_hash;
};

// Evaluates every matcher on every seed's scene. Intra-group tracks come
// from ConnectGroup; the target is matched by each matcher and verified
// geometrically. Learned matchers need `params`, else
// Error("no-checkpoint").
BenchmarkResult RunBenchmark(const BenchmarkConfig& config,
                             const ParamStore* params);

nlohmann::json BenchmarkConfigToJson(const BenchmarkConfig& config);
nlohmann::json BenchmarkToJson(const BenchmarkResult& result);
// One row per matcher.
void WriteBenchmarkCsv(const std::string& path, const BenchmarkResult& result);

}  // namespace comatcher
