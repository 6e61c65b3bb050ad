#include "comatcher/pipeline/pipeline.h"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <numeric>
#include <set>

#include "comatcher/core/error.h"
#include "comatcher/core/parallel.h"
#include "comatcher/core/random.h"
#include "comatcher/eval/metrics.h"
#include "comatcher/pipeline/group_matcher.h"
#include "comatcher/pipeline/verify.h"

namespace comatcher {
namespace {

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>* out) : out_(out) {}
  void Mark(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    (*out_)[stage] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

 private:
  std::map<std::string, double>* out_;
  std::chrono::steady_clock::time_point last_ =
      std::chrono::steady_clock::now();
};

// Sources of one group matched against one target.
struct MatchTask {
  int group = 0;
  int target = 0;
  std::vector<int> members;  // indices into the group's member list
};

MatchSet AllUnmatched(int ns, int nt) {
  MatchSet m;
  m.unmatched_source.resize(ns);
  std::iota(m.unmatched_source.begin(), m.unmatched_source.end(), 0);
  m.unmatched_target.resize(nt);
  std::iota(m.unmatched_target.begin(), m.unmatched_target.end(), 0);
  return m;
}

}  // namespace

PipelineRun RunPipeline(const std::vector<ImageFeatures>& images,
                        const PipelineConfig& cfg, const ParamStore* params,
                        const std::map<std::string, std::vector<int>>* labels) {
  if (images.size() < 2) {
    throw DataError("too-few-images", "the pipeline needs at least 2 images");
  }
  if (cfg.matcher == TargetMatcher::kLearned && params == nullptr) {
    throw Error("no-checkpoint", "the learned matcher needs parameters",
                ErrorKind::kUsage);
  }
  PipelineRun run;
  StageTimer timer(&run.timings);

  if (cfg.overlap == OverlapSource::kLabels) {
    if (!labels) throw DataError("missing-labels", "label overlap requested");
    run.graph = BuildOverlapGraphFromLabels(images, *labels);
  } else {
    run.graph = BuildOverlapGraphFromDescriptors(images, cfg.jobs);
  }
  timer.Mark("overlap");
  run.groups = GroupImages(run.graph, cfg.grouping);
  timer.Mark("grouping");

  const int ng = static_cast<int>(run.groups.size());
  std::vector<int> group_of(images.size(), -1);
  for (int g = 0; g < ng; ++g) {
    for (int v : run.groups[g].members) group_of[v] = g;
  }

  // Connecting.
  run.group_tracks.resize(ng);
  std::vector<std::map<std::pair<int, int>, MatchSet>> intra(ng);
  std::vector<std::vector<std::string>> connect_log(ng);
  ParallelFor(ng, cfg.jobs, [&](size_t g) {
    std::vector<const ImageFeatures*> views;
    for (int v : run.groups[g].members) views.push_back(&images[v]);
    ConnectOptions opt = cfg.connect;
    opt.seed = SplitMix64(cfg.seed ^ SplitMix64(g));
    run.group_tracks[g] = ConnectGroup(views, opt, &connect_log[g], &intra[g]);
  });
  for (const auto& l : connect_log) {
    run.log.insert(run.log.end(), l.begin(), l.end());
  }
  std::set<std::pair<int, int>> covered;
  auto key = [](int a, int b) { return std::pair(std::min(a, b), std::max(a, b)); };
  for (int g = 0; g < ng; ++g) {
    const auto& members = run.groups[g].members;
    for (const auto& [ij, set] : intra[g]) {
      const int a = members[ij.first], b = members[ij.second];
      if (!run.graph.HasEdge(a, b)) continue;
      run.raw.push_back({images[a].image_id, images[b].image_id, set});
      covered.insert(key(a, b));
    }
  }
  const size_t num_intra = run.raw.size();
  timer.Mark("connect");

  // Group-to-target tasks.
  std::vector<int> targets(images.size());
  std::iota(targets.begin(), targets.end(), 0);
  std::sort(targets.begin(), targets.end(), [&](int a, int b) {
    return images[a].image_id < images[b].image_id;
  });
  std::vector<int> group_order(ng);
  std::iota(group_order.begin(), group_order.end(), 0);
  std::sort(group_order.begin(), group_order.end(), [&](int a, int b) {
    return images[run.groups[a].seed].image_id <
           images[run.groups[b].seed].image_id;
  });
  const int chunk = cfg.matcher == TargetMatcher::kLearned
                        ? std::max(1, cfg.net.max_sources)
                        : 1 << 30;
  std::vector<MatchTask> tasks;
  for (int t : targets) {
    for (int g : group_order) {
      if (group_of[t] == g) continue;
      const auto& members = run.groups[g].members;
      MatchTask task{g, t, {}};
      for (int k = 0; k < static_cast<int>(members.size()); ++k) {
        const int s = members[k];
        if (!run.graph.HasEdge(s, t) || covered.count(key(s, t))) continue;
        covered.insert(key(s, t));
        task.members.push_back(k);
        if (static_cast<int>(task.members.size()) == chunk) {
          tasks.push_back(task);
          task.members.clear();
        }
      }
      if (!task.members.empty()) tasks.push_back(task);
    }
  }

  std::vector<std::vector<MatchSet>> task_out(tasks.size());
  std::vector<std::string> task_log(tasks.size());
  ParallelFor(tasks.size(), cfg.jobs, [&](size_t k) {
    const MatchTask& task = tasks[k];
    const auto& members = run.groups[task.group].members;
    const ImageFeatures& target = images[task.target];
    std::vector<const ImageFeatures*> sources;
    for (int m : task.members) sources.push_back(&images[members[m]]);
    try {
      if (cfg.matcher == TargetMatcher::kLearned) {
        const GroupTracks sub = run.group_tracks[task.group].Restrict(task.members);
        task_out[k] = MatchGroupToTarget(sources, target, sub, *params, cfg.net,
                                         cfg.ablation);
      } else {
        for (const auto* s : sources) {
          task_out[k].push_back(
              DescriptorMatches(*s, target, cfg.connect.min_similarity));
        }
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kUsage) throw;
      task_log[k] = "match " + target.image_id + " <- group " +
                    images[run.groups[task.group].seed].image_id + ": " +
                    e.what();
      task_out[k].clear();
      for (const auto* s : sources) {
        MatchSet m = AllUnmatched(s->size(), target.size());
        m.unverified = true;
        task_out[k].push_back(std::move(m));
      }
    }
  });
  for (size_t k = 0; k < tasks.size(); ++k) {
    if (!task_log[k].empty()) run.log.push_back(task_log[k]);
    const auto& members = run.groups[tasks[k].group].members;
    for (size_t i = 0; i < tasks[k].members.size(); ++i) {
      run.raw.push_back({images[members[tasks[k].members[i]]].image_id,
                         images[tasks[k].target].image_id, task_out[k][i]});
    }
  }
  timer.Mark("match");

  // Verification; intra-group sets were verified while connecting.
  std::map<std::string, int> index;
  for (size_t k = 0; k < images.size(); ++k) index[images[k].image_id] = k;
  run.verified = run.raw;
  ParallelFor(run.raw.size() - num_intra, cfg.jobs, [&](size_t k) {
    PairMatches& pm = run.verified[num_intra + k];
    const uint64_t seed = SplitMix64(cfg.seed ^ SplitMix64(~uint64_t(k)));
    pm.matches = GeometricVerify(pm.matches, images[index[pm.source_id]],
                                 images[index[pm.target_id]], cfg.verify_px,
                                 seed);
  });
  timer.Mark("verify");

  run.tracks = MergeTracks(run.verified);
  timer.Mark("merge");
  return run;
}

nlohmann::json PipelineReport(const PipelineRun& run, bool with_timings) {
  const TrackStats stats = ComputeTrackStats(run.tracks);
  nlohmann::json j = {{"num_groups", run.groups.size()},
                      {"num_pairs_matched", run.verified.size()},
                      {"num_tracks", run.tracks.size()},
                      {"NL", stats.num_landmarks},
                      {"TL", stats.mean_track_length}};
  if (with_timings) j["timings"] = run.timings;
  return j;
}

void WritePipelineRun(const std::string& dir, const PipelineRun& run,
                      bool with_timings) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  WriteOverlapCsv((d / "overlap.csv").string(), run.graph);
  WriteJsonFile((d / "groups.json").string(), GroupsToJson(run.groups, run.graph));
  WriteMatchFile((d / "raw_matches.jsonl").string(), run.raw);
  WriteMatchFile((d / "matches.jsonl").string(), run.verified);
  WriteTracksFile((d / "tracks.jsonl").string(), run.tracks);
  WriteJsonFile((d / "report.json").string(), PipelineReport(run, with_timings));
}

}  // namespace comatcher
