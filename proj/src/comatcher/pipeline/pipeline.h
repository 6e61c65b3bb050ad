#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "comatcher/core/param_store.h"
#include "comatcher/features/image_features.h"
#include "comatcher/geometry/group_tracks.h"
#include "comatcher/grouping/group_images.h"
#include "comatcher/grouping/overlap_graph.h"
#include "comatcher/match/match_file.h"
#include "comatcher/net/net_config.h"
#include "comatcher/pipeline/connect.h"
#include "comatcher/pipeline/global_tracks.h"

namespace comatcher {

enum class OverlapSource { kLabels, kDescriptors };
enum class TargetMatcher { kLearned, kDescriptor };

struct PipelineConfig {
  OverlapSource overlap = OverlapSource::kDescriptors;
  GroupingOptions grouping;
  ConnectOptions connect;
  TargetMatcher matcher = TargetMatcher::kLearned;
  NetConfig net;
  AblationSwitches ablation;
  double verify_px = 3.0;
  uint64_t seed = 0;
  int jobs = 1;
};

struct PipelineRun {
  OverlapGraph graph;
  std::vector<Group> groups;
  std::vector<GroupTracks> group_tracks;
  // One entry per overlap-graph edge: intra-group edges first (group order,
  // then member pairs), then group-to-target matching in processing order.
  std::vector<PairMatches> raw;
  std::vector<PairMatches> verified;
  std::vector<GlobalTrack> tracks;
  std::vector<std::string> log;
  std::map<std::string, double> timings;  // seconds per stage
};

// Overlap graph, grouping, connecting, group-to-target matching (targets in
// ascending id, groups in ascending seed id), verification and merging.
// `params` is required for the learned matcher and `labels` for label
// overlap. Failures of one pair are logged and leave that pair unmatched.
PipelineRun RunPipeline(const std::vector<ImageFeatures>& images,
                        const PipelineConfig& config,
                        const ParamStore* params = nullptr,
                        const std::map<std::string, std::vector<int>>* labels =
                            nullptr);

// {num_groups, num_pairs_matched, num_tracks, NL, TL[, timings]}.
nlohmann::json PipelineReport(const PipelineRun& run, bool with_timings);

// overlap.csv, groups.json, raw_matches.jsonl, matches.jsonl, tracks.jsonl
// and report.json under `dir`.
void WritePipelineRun(const std::string& dir, const PipelineRun& run,
                      bool with_timings);

}  // namespace comatcher
