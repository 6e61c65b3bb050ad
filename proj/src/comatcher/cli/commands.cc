#include "comatcher/cli/commands.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "comatcher/cli/run_config.h"
#include "comatcher/core/checkpoint.h"
#include "comatcher/core/error.h"
#include "comatcher/core/hash.h"
#include "comatcher/core/parallel.h"
#include "comatcher/core/random.h"
#include "comatcher/eval/benchmark.h"
#include "comatcher/eval/metrics.h"
#include "comatcher/eval/track_eval.h"
#include "comatcher/features/scene_bundle.h"
#include "comatcher/pipeline/group_matcher.h"
#include "comatcher/pipeline/verify.h"
#include "comatcher/training/grad_probe.h"

namespace comatcher {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  int jobs = 1;
};

void AddCommon(CLI::App* sub, Common* c) {
  sub->add_option("--config", c->config_path, "JSON configuration file");
  sub->add_option("--set", c->overrides, "override, e.g. net.dim=32")
      ->allow_extra_args(false);
  sub->add_option("--jobs", c->jobs, "worker threads")
      ->check(CLI::PositiveNumber);
}

// Adds a dotted key to the flag patch when the optional is set.
template <typename T>
void Patch(json* patch, const std::string& key, const std::optional<T>& v) {
  if (!v) return;
  json* node = patch;
  size_t start = 0;
  for (size_t dot; (dot = key.find('.', start)) != std::string::npos;
       start = dot + 1) {
    node = &(*node)[key.substr(start, dot - start)];
  }
  (*node)[key.substr(start)] = *v;
}

void EnsureParent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

// Inputs are echoed by name and content hash, so artifacts do not depend on
// where the inputs live.
json InputRecord(const std::string& path) {
  const fs::path p(path);
  if (fs::is_directory(p)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    json contents = json::object();
    for (const auto& f : files) {
      contents[f.filename().string()] =
          GitBlobSha1(ReadFileBytes(f.string()));
    }
    return {{"name", p.filename().string()}, {"files", contents}};
  }
  return {{"name", p.filename().string()},
          {"sha1", GitBlobSha1(ReadFileBytes(path))}};
}

void WriteSidecar(const std::string& path, const std::string& command,
                  const json& inputs, const RunConfig& cfg) {
  WriteJsonFile(path, {{"command", command},
                       {"version", VersionString()},
                       {"inputs", inputs},
                       {"config", RunConfigToJson(cfg)}});
}

ParamStore LoadParams(const std::string& path, RunConfig* cfg) {
  CheckpointHeader h;
  ParamStore p = ReadCheckpoint(path, &h);
  cfg->net.dim = static_cast<int>(h.dim);
  cfg->net.layers = static_cast<int>(h.layers);
  cfg->net.heads = static_cast<int>(h.heads);
  cfg->net.Validate();
  CheckNetParams(cfg->net, p);
  return p;
}

ImageLabels ReadLabels(const std::string& path) {
  const json j = ReadJsonFile(path);
  try {
    return j.get<ImageLabels>();
  } catch (const json::exception& e) {
    throw DataError("malformed-labels", path + ": " + e.what());
  }
}

int IndexOfId(const std::vector<ImageFeatures>& images,
              const std::string& id) {
  for (size_t k = 0; k < images.size(); ++k) {
    if (images[k].image_id == id) return static_cast<int>(k);
  }
  throw DataError("unknown-image", id);
}

std::vector<std::string> Ids(const std::vector<ImageFeatures>& images) {
  std::vector<std::string> ids;
  for (const auto& im : images) ids.push_back(im.image_id);
  return ids;
}

// Bundle restricted to the listed images, in that order.
SceneBundle SubBundle(const SceneBundle& b,
                      const std::vector<std::string>& ids) {
  SceneBundle out;
  for (const auto& id : ids) {
    out.images.push_back(b.images[b.IndexOf(id)]);
    if (b.homographies.count(id)) out.homographies[id] = b.homographies.at(id);
    if (b.labels.count(id)) out.labels[id] = b.labels.at(id);
  }
  auto in = [&](const std::string& id) {
    return std::find(ids.begin(), ids.end(), id) != ids.end();
  };
  for (const auto& r : b.gt) {
    if (in(r.i) && in(r.t)) out.gt.push_back(r);
  }
  return out;
}

// ---- generate ----

struct GenerateArgs {
  std::string out;
  int scenes = 1;
  std::optional<uint64_t> seed;
  std::optional<int> points, sources;
  std::optional<double> ambiguity, dropout, noise;
};

int RunGenerate(const Common& c, const GenerateArgs& a) {
  json patch = json::object();
  Patch(&patch, "seed", a.seed);
  Patch(&patch, "scene.num_points", a.points);
  Patch(&patch, "scene.num_sources", a.sources);
  Patch(&patch, "scene.ambiguity_rate", a.ambiguity);
  Patch(&patch, "scene.dropout_rate", a.dropout);
  Patch(&patch, "scene.descriptor_noise_sigma", a.noise);
  const RunConfig cfg = ResolveRunConfig(c.config_path, c.overrides, patch);
  if (a.scenes < 1) {
    throw Error("invalid-config", "--scenes must be >= 1", ErrorKind::kUsage);
  }
  std::vector<SceneBundle> bundles(a.scenes);
  ParallelFor(bundles.size(), c.jobs, [&](size_t k) {
    SceneConfig sc = cfg.scene;
    if (a.scenes > 1) sc.id_prefix += std::to_string(k) + "_";
    bundles[k] = BundleFromScene(GenerateScene(cfg.seed + k, sc));
  });
  json scenes = json::array();
  for (size_t k = 0; k < bundles.size(); ++k) {
    scenes.push_back({{"seed", cfg.seed + k}, {"images", Ids(bundles[k].images)}});
  }
  fs::create_directories(a.out);
  WriteSceneBundle(a.out, MergeBundles(bundles));
  WriteJsonFile((fs::path(a.out) / "scenes.json").string(), {{"scenes", scenes}});
  WriteSidecar((fs::path(a.out) / "config.json").string(), "generate",
               {{"scenes", a.scenes}}, cfg);
  std::cerr << "generated " << a.scenes << " scene(s) in " << a.out << "\n";
  return 0;
}

// ---- train ----

struct TrainArgs {
  std::string data, out;
  std::optional<uint64_t> seed;
  std::optional<int> steps, batch, dim, layers, heads;
  std::optional<double> lr;
};

int RunTrain(const Common& c, const TrainArgs& a) {
  json patch = json::object();
  Patch(&patch, "seed", a.seed);
  Patch(&patch, "train.steps", a.steps);
  Patch(&patch, "train.batch_scenes", a.batch);
  Patch(&patch, "train.learning_rate", a.lr);
  Patch(&patch, "net.dim", a.dim);
  Patch(&patch, "net.layers", a.layers);
  Patch(&patch, "net.heads", a.heads);
  const RunConfig cfg = ResolveRunConfig(c.config_path, c.overrides, patch);
  TrainConfig tc = cfg.train;
  tc.jobs = c.jobs;

  SampleSource source;
  json inputs = json::object();
  if (!a.data.empty()) {
    const SceneBundle bundle = ReadSceneBundle(a.data);
    std::vector<std::vector<std::string>> scenes;
    const fs::path index = fs::path(a.data) / "scenes.json";
    if (fs::exists(index)) {
      try {
        const json doc = ReadJsonFile(index.string());
        for (const auto& s : doc.at("scenes")) {
          scenes.push_back(s.at("images").get<std::vector<std::string>>());
        }
      } catch (const json::exception& e) {
        throw DataError("malformed-json", index.string() + ": " + e.what());
      }
    } else {
      scenes.push_back(Ids(bundle.images));
    }
    auto samples = std::make_shared<std::vector<TrainSample>>();
    for (const auto& ids : scenes) {
      samples->push_back(SampleFromBundle(SubBundle(bundle, ids)));
    }
    if (samples->empty()) throw DataError("empty-data", a.data);
    source = [samples](uint64_t i) { return (*samples)[i % samples->size()]; };
    inputs["data"] = InputRecord(a.data);
  } else {
    const SceneConfig sc = cfg.scene;
    const uint64_t seed = cfg.seed;
    source = [sc, seed](uint64_t i) {
      return SampleFromScene(GenerateScene(SplitMix64(seed ^ SplitMix64(i)), sc));
    };
  }

  EnsureParent(a.out);
  ParamStore params = InitNetParams(cfg.net, cfg.seed);
  const CheckpointHeader header{static_cast<uint32_t>(cfg.net.dim),
                                static_cast<uint32_t>(cfg.net.layers),
                                static_cast<uint32_t>(cfg.net.heads)};
  const auto records = Train(
      &params, cfg.net, tc, source, [&](int step, const ParamStore& p) {
        const std::string path =
            step == tc.steps ? a.out : a.out + ".step" + std::to_string(step);
        WriteCheckpoint(path, header, p);
      });
  WriteLossCsv(a.out + ".loss.csv", records);
  WriteSidecar(a.out + ".config.json", "train", inputs, cfg);
  if (!records.empty()) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "loss %.6g -> %.6g over %d steps\n",
                  records.front().total, records.back().total, tc.steps);
    std::cerr << buf;
  }
  return 0;
}

// ---- group ----

struct GroupArgs {
  std::string features, out, labels, overlap_out;
  std::optional<double> theta_min, theta_max;
  std::optional<int> max_size;
};

OverlapGraph BuildGraph(const RunConfig& cfg,
                        const std::vector<ImageFeatures>& images,
                        const std::string& labels_path, int jobs) {
  if (cfg.overlap == OverlapSource::kLabels) {
    if (labels_path.empty()) {
      throw Error("missing-labels", "label overlap needs --labels",
                  ErrorKind::kUsage);
    }
    return BuildOverlapGraphFromLabels(images, ReadLabels(labels_path));
  }
  return BuildOverlapGraphFromDescriptors(images, jobs);
}

int RunGroup(const Common& c, const GroupArgs& a) {
  json patch = json::object();
  Patch(&patch, "grouping.theta_min", a.theta_min);
  Patch(&patch, "grouping.theta_max", a.theta_max);
  Patch(&patch, "grouping.max_size", a.max_size);
  const RunConfig cfg = ResolveRunConfig(c.config_path, c.overrides, patch);
  const auto images = ReadFeaturesFile(a.features);
  const OverlapGraph graph = BuildGraph(cfg, images, a.labels, c.jobs);
  const auto groups = GroupImages(graph, cfg.grouping);
  EnsureParent(a.out);
  WriteJsonFile(a.out, GroupsToJson(groups, graph));
  if (!a.overlap_out.empty()) {
    EnsureParent(a.overlap_out);
    WriteOverlapCsv(a.overlap_out, graph);
  }
  json inputs = {{"features", InputRecord(a.features)}};
  if (!a.labels.empty()) inputs["labels"] = InputRecord(a.labels);
  WriteSidecar(a.out + ".config.json", "group", inputs, cfg);
  std::cerr << groups.size() << " group(s) over " << images.size()
            << " image(s)\n";
  return 0;
}

// ---- connect ----

struct ConnectArgs {
  std::string features, group, out;
};

std::vector<std::vector<PairMatches>> ConnectAll(
    const std::vector<ImageFeatures>& images, const std::vector<Group>& groups,
    const ConnectOptions& opt, int jobs, std::vector<GroupTracks>* tracks) {
  std::vector<std::vector<PairMatches>> out(groups.size());
  std::vector<std::vector<std::string>> logs(groups.size());
  if (tracks) tracks->assign(groups.size(), GroupTracks{});
  ParallelFor(groups.size(), jobs, [&](size_t g) {
    std::vector<const ImageFeatures*> views;
    for (int m : groups[g].members) views.push_back(&images[m]);
    std::map<std::pair<int, int>, MatchSet> sets;
    GroupTracks t = ConnectGroup(views, opt, &logs[g], &sets);
    for (const auto& [key, set] : sets) {
      out[g].push_back({views[key.first]->image_id,
                        views[key.second]->image_id, set});
    }
    if (tracks) (*tracks)[g] = std::move(t);
  });
  for (const auto& log : logs) {
    for (const auto& line : log) std::cerr << line << "\n";
  }
  return out;
}

int RunConnect(const Common& c, const ConnectArgs& a) {
  const RunConfig cfg = ResolveRunConfig(c.config_path, c.overrides, {});
  const auto images = ReadFeaturesFile(a.features);
  const auto groups = GroupsFromJson(ReadJsonFile(a.group), Ids(images));
  std::vector<PairMatches> all;
  for (auto& part : ConnectAll(images, groups, cfg.connect, c.jobs, nullptr)) {
    for (auto& pm : part) all.push_back(std::move(pm));
  }
  EnsureParent(a.out);
  WriteMatchFile(a.out, all);
  WriteSidecar(a.out + ".config.json", "connect",
               {{"features", InputRecord(a.features)},
                {"group", InputRecord(a.group)}},
               cfg);
  std::cerr << all.size() << " intra-group pair(s)\n";
  return 0;
}

// ---- match ----

struct MatchArgs {
  std::string ckpt, features, group, target, out;
};

int RunMatch(const Common& c, const MatchArgs& a) {
  RunConfig cfg = ResolveRunConfig(c.config_path, c.overrides, {});
  std::optional<ParamStore> params;
  json inputs = {{"features", InputRecord(a.features)},
                 {"group", InputRecord(a.group)},
                 {"target", a.target}};
  if (cfg.matcher == TargetMatcher::kLearned) {
    if (a.ckpt.empty()) {
      throw Error("no-checkpoint", "learned matching needs --ckpt",
                  ErrorKind::kUsage);
    }
    params = LoadParams(a.ckpt, &cfg);
    inputs["checkpoint"] = InputRecord(a.ckpt);
  }
  const auto images = ReadFeaturesFile(a.features);
  const int target = IndexOfId(images, a.target);
  auto groups = GroupsFromJson(ReadJsonFile(a.group), Ids(images));
  for (auto& g : groups) {
    g.members.erase(std::remove(g.members.begin(), g.members.end(), target),
                    g.members.end());
  }
  std::vector<GroupTracks> tracks;
  ConnectAll(images, groups, cfg.connect, c.jobs, &tracks);

  std::vector<std::vector<PairMatches>> slots(groups.size());
  ParallelFor(groups.size(), c.jobs, [&](size_t g) {
    const auto& members = groups[g].members;
    const int chunk = cfg.net.max_sources;
    for (size_t begin = 0; begin < members.size(); begin += chunk) {
      const size_t end = std::min(members.size(), begin + chunk);
      std::vector<int> local;
      std::vector<const ImageFeatures*> sources;
      for (size_t k = begin; k < end; ++k) {
        local.push_back(static_cast<int>(k));
        sources.push_back(&images[members[k]]);
      }
      std::vector<MatchSet> sets;
      if (params) {
        sets = MatchGroupToTarget(sources, images[target],
                                  tracks[g].Restrict(local), *params, cfg.net,
                                  cfg.ablation);
      } else {
        for (const auto* s : sources) {
          sets.push_back(DescriptorMatches(*s, images[target],
                                           cfg.connect.min_similarity));
        }
      }
      for (size_t k = 0; k < sets.size(); ++k) {
        slots[g].push_back(
            {sources[k]->image_id, images[target].image_id, sets[k]});
      }
    }
  });
  std::vector<PairMatches> all;
  for (auto& s : slots) {
    for (auto& pm : s) all.push_back(std::move(pm));
  }
  EnsureParent(a.out);
  WriteMatchFile(a.out, all);
  WriteSidecar(a.out + ".config.json", "match", inputs, cfg);
  std::cerr << all.size() << " pair(s) matched to " << a.target << "\n";
  return 0;
}

// ---- tracks ----

struct TracksArgs {
  std::vector<std::string> matches;
  std::string features, out;
  bool verify = false;
};

int RunTracks(const Common& c, const TracksArgs& a) {
  const RunConfig cfg = ResolveRunConfig(c.config_path, c.overrides, {});
  std::vector<PairMatches> all;
  for (const auto& path : a.matches) {
    for (auto& pm : ReadMatchFile(path)) all.push_back(std::move(pm));
  }
  json inputs = {{"matches", json::array()}};
  for (const auto& path : a.matches) {
    inputs["matches"].push_back(InputRecord(path));
  }
  if (a.verify) {
    if (a.features.empty()) {
      throw Error("missing-features", "--verify needs --features",
                  ErrorKind::kUsage);
    }
    inputs["features"] = InputRecord(a.features);
    const auto images = ReadFeaturesFile(a.features);
    std::vector<int> src(all.size()), tgt(all.size());
    for (size_t k = 0; k < all.size(); ++k) {
      src[k] = IndexOfId(images, all[k].source_id);
      tgt[k] = IndexOfId(images, all[k].target_id);
    }
    ParallelFor(all.size(), c.jobs, [&](size_t k) {
      const uint64_t seed = SplitMix64(cfg.seed ^ SplitMix64(~uint64_t(k)));
      all[k].matches = GeometricVerify(all[k].matches, images[src[k]],
                                       images[tgt[k]], cfg.verify_px, seed);
    });
  }
  const auto tracks = MergeTracks(all);
  EnsureParent(a.out);
  WriteTracksFile(a.out, tracks);
  WriteSidecar(a.out + ".config.json", "tracks", inputs, cfg);
  const TrackStats s = ComputeTrackStats(tracks);
  std::cerr << "NL " << s.num_landmarks << " TL " << s.mean_track_length
            << "\n";
  return 0;
}

// ---- pipeline ----

struct PipelineArgs {
  std::string features, ckpt, out, labels;
  bool timings = false;
  std::optional<std::string> matcher, overlap;
};

int RunPipelineCommand(const Common& c, const PipelineArgs& a) {
  json patch = json::object();
  Patch(&patch, "pipeline.matcher", a.matcher);
  Patch(&patch, "pipeline.overlap", a.overlap);
  RunConfig cfg = ResolveRunConfig(c.config_path, c.overrides, patch);
  json inputs = {{"features", InputRecord(a.features)}};
  std::optional<ParamStore> params;
  if (!a.ckpt.empty()) {
    params = LoadParams(a.ckpt, &cfg);
    inputs["checkpoint"] = InputRecord(a.ckpt);
  }
  std::optional<ImageLabels> labels;
  if (!a.labels.empty()) {
    labels = ReadLabels(a.labels);
    inputs["labels"] = InputRecord(a.labels);
  }
  const auto images = ReadFeaturesFile(a.features);
  const PipelineRun run =
      RunPipeline(images, cfg.Pipeline(c.jobs), params ? &*params : nullptr,
                  labels ? &*labels : nullptr);
  for (const auto& line : run.log) std::cerr << line << "\n";
  fs::create_directories(a.out);
  WritePipelineRun(a.out, run, a.timings);
  WriteSidecar((fs::path(a.out) / "config.json").string(), "pipeline", inputs,
               cfg);
  const TrackStats s = ComputeTrackStats(run.tracks);
  std::cerr << run.groups.size() << " group(s), NL " << s.num_landmarks
            << " TL " << s.mean_track_length << "\n";
  return 0;
}

// ---- eval ----

struct EvalArgs {
  std::string pred, gt, report, tracks, labels;
};

// Reads predictions as a match file, or as a ground-truth file whose labeled
// matches are taken as the prediction.
std::vector<PairMatches> ReadPredictions(const std::string& path) {
  const auto lines = ReadJsonLines(path);
  if (!lines.empty() && lines.front().contains("i")) {
    std::vector<PairMatches> out;
    for (const auto& r : ReadGtFile(path)) {
      PairMatches pm;
      pm.source_id = r.i;
      pm.target_id = r.t;
      for (const auto& [u, x] : r.labels.matches) {
        pm.matches.pairs.push_back({u, x, 1.0});
      }
      std::sort(pm.matches.pairs.begin(), pm.matches.pairs.end(),
                [](const ScoredMatch& p, const ScoredMatch& q) {
                  return p.u < q.u;
                });
      pm.matches.unmatched_source = r.labels.unmatched_source;
      pm.matches.unmatched_target = r.labels.unmatched_target;
      out.push_back(std::move(pm));
    }
    return out;
  }
  return ReadMatchFile(path);
}

json PrToJson(const PrecisionRecall& r) {
  return {{"precision", r.precision}, {"recall", r.recall},
          {"correct", r.correct},     {"considered", r.considered},
          {"gt", r.gt}};
}

int RunEval(const Common& c, const EvalArgs& a) {
  const RunConfig cfg = ResolveRunConfig(c.config_path, c.overrides, {});
  const auto pred = ReadPredictions(a.pred);
  std::map<std::pair<std::string, std::string>, GtLabels> gt;
  for (const auto& r : ReadGtFile(a.gt)) {
    gt[{r.i, r.t}] = r.labels;
    gt.emplace(std::make_pair(r.t, r.i), SwapGtLabels(r.labels));
  }
  json pairs = json::array();
  std::vector<PrecisionRecall> parts;
  int unlabeled = 0;
  for (const auto& pm : pred) {
    const auto it = gt.find({pm.source_id, pm.target_id});
    if (it == gt.end()) {
      ++unlabeled;
      continue;
    }
    parts.push_back(ComputePrecisionRecall(pm.matches, it->second));
    json row = PrToJson(parts.back());
    row["source_id"] = pm.source_id;
    row["target_id"] = pm.target_id;
    pairs.push_back(row);
  }
  if (parts.empty()) throw DataError("empty-eval", "no labeled pairs");
  json report = {{"pooled", PrToJson(Pool(parts))},
                 {"pairs", pairs},
                 {"unlabeled_pairs", unlabeled}};
  json inputs = {{"pred", InputRecord(a.pred)}, {"gt", InputRecord(a.gt)}};
  if (!a.tracks.empty()) {
    const auto tracks = ReadTracksFile(a.tracks);
    const TrackStats s = ComputeTrackStats(tracks);
    report["tracks"] = {{"NL", s.num_landmarks}, {"TL", s.mean_track_length}};
    if (!a.labels.empty()) {
      report["tracks"]["precision"] = TrackPrecision(tracks, ReadLabels(a.labels));
      inputs["labels"] = InputRecord(a.labels);
    }
    inputs["tracks"] = InputRecord(a.tracks);
  }
  EnsureParent(a.report);
  WriteJsonFile(a.report, report);
  WriteSidecar(a.report + ".config.json", "eval", inputs, cfg);
  const auto pooled = Pool(parts);
  std::cerr << "precision " << pooled.precision << " recall " << pooled.recall
            << "\n";
  return 0;
}

// ---- gradcheck ----

struct GradArgs {
  std::optional<int> layers, dim, heads;
  std::optional<uint64_t> seed;
  int sources = 2;
  int points = 4;
};

int RunGradCheck(const Common& c, const GradArgs& a) {
  json patch = json::object();
  Patch(&patch, "net.layers", a.layers);
  Patch(&patch, "net.dim", a.dim);
  Patch(&patch, "net.heads", a.heads);
  Patch(&patch, "seed", a.seed);
  RunConfig cfg = ResolveRunConfig(c.config_path, c.overrides, patch);
  cfg.net.max_sources = std::max(cfg.net.max_sources, a.sources);
  const GradCheckResult r =
      NetworkGradCheck(cfg.net, a.sources, a.points, cfg.seed);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "max relative error %.3e over %zu scalars (worst %s[%ld])\n",
                r.max_relative_error, r.num_checked, r.worst_parameter.c_str(),
                static_cast<long>(r.worst_index));
  std::cerr << buf;
  return r.max_relative_error < 1e-4 ? 0 : 3;
}

// ---- benchmark ----

struct BenchmarkArgs {
  std::string ckpt, out;
  bool ambiguous = false;
  std::optional<int> seeds;
};

int RunBenchmarkCommand(const Common& c, const BenchmarkArgs& a) {
  json patch = json::object();
  if (a.ambiguous) {
    patch["scene"] = {{"ambiguity_rate", 0.3}, {"dropout_rate", 0.2}};
  }
  Patch(&patch, "benchmark.seeds", a.seeds);
  RunConfig cfg = ResolveRunConfig(c.config_path, c.overrides, patch);
  std::optional<ParamStore> params;
  BenchmarkConfig bc;
  json inputs = json::object();
  if (!a.ckpt.empty()) {
    params = LoadParams(a.ckpt, &cfg);
    bc.checkpoint_path = a.ckpt;
    bc.matchers = AblationMatchers(cfg.benchmark_group_size);
    if (cfg.benchmark_group_size > cfg.net.max_sources) {
      throw Error("invalid-config", "benchmark.group_size > net.max_sources",
                  ErrorKind::kUsage);
    }
    inputs["checkpoint"] = InputRecord(a.ckpt);
  }
  MatcherConfig desc;
  desc.name = "descriptor";
  desc.kind = MatcherKind::kDescriptor;
  desc.min_similarity = cfg.connect.min_similarity;
  bc.matchers.push_back(desc);
  bc.scene = cfg.scene;
  bc.net = cfg.net;
  bc.jobs = c.jobs;
  for (int k = 0; k < cfg.benchmark_seeds; ++k) bc.seeds.push_back(cfg.seed + k);
  BenchmarkResult res = RunBenchmark(bc, params ? &*params : nullptr);
  fs::create_directories(a.out);
  WriteJsonFile((fs::path(a.out) / "benchmark.json").string(),
                BenchmarkToJson(res));
  WriteBenchmarkCsv((fs::path(a.out) / "benchmark.csv").string(), res);
  WriteSidecar((fs::path(a.out) / "config.json").string(), "benchmark", inputs,
               cfg);
  for (const auto& s : res.summary) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%-16s P %.3f R %.3f AUC@5 %.3f NL %.1f TL %.2f\n",
                  s.matcher.c_str(), s.precision.mean, s.recall.mean,
                  s.auc5.mean, s.nl.mean, s.tl.mean);
    std::cerr << buf;
  }
  return 0;
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return 1;
    case ErrorKind::kData:
      return 2;
    case ErrorKind::kNumeric:
      return 3;
  }
  return 2;
}

}  // namespace

std::string VersionString() { return COMATCHER_VERSION; }

int Dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Multi-view collaborative feature matching", "comatcher"};
  app.require_subcommand(0, 1);
  bool version = false;
  app.add_flag("--version", version, "print versions and exit");

  Common common;
  GenerateArgs gen;
  TrainArgs train;
  GroupArgs group;
  ConnectArgs connect;
  MatchArgs match;
  TracksArgs tracks;
  PipelineArgs pipe;
  EvalArgs eval;
  GradArgs grad;
  BenchmarkArgs bench;

  auto* g = app.add_subcommand("generate", "write synthetic scene bundles");
  g->add_option("--out", gen.out, "output directory")->required();
  g->add_option("--seed", gen.seed, "first scene seed");
  g->add_option("--scenes", gen.scenes, "number of scenes");
  g->add_option("--points", gen.points, "world points per scene");
  g->add_option("--sources", gen.sources, "source views per scene");
  g->add_option("--ambiguity", gen.ambiguity, "ambiguity rate");
  g->add_option("--dropout", gen.dropout, "dropout rate");
  g->add_option("--noise", gen.noise, "descriptor noise sigma");

  auto* t = app.add_subcommand("train", "train the network");
  t->add_option("--data", train.data, "scene bundle directory");
  t->add_option("--out", train.out, "checkpoint path")->required();
  t->add_option("--seed", train.seed, "seed");
  t->add_option("--steps", train.steps, "gradient steps");
  t->add_option("--batch", train.batch, "scenes per step");
  t->add_option("--lr", train.lr, "learning rate");
  t->add_option("--dim", train.dim, "descriptor dimension");
  t->add_option("--layers", train.layers, "layer count");
  t->add_option("--heads", train.heads, "attention heads");

  auto* gr = app.add_subcommand("group", "build the overlap graph and groups");
  gr->add_option("--features", group.features, "features file")->required();
  gr->add_option("--out", group.out, "groups file")->required();
  gr->add_option("--labels", group.labels, "labels.json for label overlap");
  gr->add_option("--overlap-out", group.overlap_out, "overlap CSV");
  gr->add_option("--theta-min", group.theta_min, "grouping theta_min");
  gr->add_option("--theta-max", group.theta_max, "grouping theta_max");
  gr->add_option("--max-size", group.max_size, "group size cap");

  auto* cn = app.add_subcommand("connect", "match views inside each group");
  cn->add_option("--features", connect.features, "features file")->required();
  cn->add_option("--group", connect.group, "groups file")->required();
  cn->add_option("--out", connect.out, "match file")->required();

  auto* m = app.add_subcommand("match", "match groups to a target view");
  m->add_option("--ckpt", match.ckpt, "checkpoint");
  m->add_option("--features", match.features, "features file")->required();
  m->add_option("--group", match.group, "groups file")->required();
  m->add_option("--target", match.target, "target image id")->required();
  m->add_option("--out", match.out, "match file")->required();

  auto* tr = app.add_subcommand("tracks", "merge pair matches into tracks");
  tr->add_option("--matches", tracks.matches, "match files")->required();
  tr->add_option("--features", tracks.features, "features file");
  tr->add_flag("--verify", tracks.verify, "verify pairs geometrically first");
  tr->add_option("--out", tracks.out, "tracks file")->required();

  auto* p = app.add_subcommand("pipeline", "run the full groupwise pipeline");
  p->add_option("--features", pipe.features, "features file")->required();
  p->add_option("--ckpt", pipe.ckpt, "checkpoint");
  p->add_option("--out", pipe.out, "output directory")->required();
  p->add_option("--labels", pipe.labels, "labels.json for label overlap");
  p->add_option("--matcher", pipe.matcher, "learned or descriptor");
  p->add_option("--overlap", pipe.overlap, "descriptors or labels");
  p->add_flag("--timings", pipe.timings, "record stage timings in report");

  auto* e = app.add_subcommand("eval", "score predicted matches");
  e->add_option("--pred", eval.pred, "predicted matches")->required();
  e->add_option("--gt", eval.gt, "ground-truth matches")->required();
  e->add_option("--report", eval.report, "report path")->required();
  e->add_option("--tracks", eval.tracks, "tracks file");
  e->add_option("--labels", eval.labels, "labels.json for track precision");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference check");
  gc->add_option("--layers", grad.layers, "layer count");
  gc->add_option("--dim", grad.dim, "descriptor dimension");
  gc->add_option("--heads", grad.heads, "attention heads");
  gc->add_option("--seed", grad.seed, "seed");
  gc->add_option("--sources", grad.sources, "source views");
  gc->add_option("--points", grad.points, "keypoints per view");

  auto* b = app.add_subcommand("benchmark", "evaluate matchers on scenes");
  b->add_option("--ckpt", bench.ckpt, "checkpoint");
  b->add_option("--out", bench.out, "output directory")->required();
  b->add_flag("--ambiguous", bench.ambiguous, "ambiguity 0.3, dropout 0.2");
  b->add_option("--seeds", bench.seeds, "number of scenes");

  for (auto* sub : {g, t, gr, cn, m, tr, p, e, gc, b}) AddCommon(sub, &common);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, std::cerr, std::cerr);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex, std::cerr, std::cerr);
    if (!ex.get_exit_code()) return 0;
    std::cerr << app.help();
    return 1;
  }
  if (version) {
    std::printf("comatcher %s (checkpoint format %u)\n",
                VersionString().c_str(), kCheckpointVersion);
    return 0;
  }
  try {
    if (g->parsed()) return RunGenerate(common, gen);
    if (t->parsed()) return RunTrain(common, train);
    if (gr->parsed()) return RunGroup(common, group);
    if (cn->parsed()) return RunConnect(common, connect);
    if (m->parsed()) return RunMatch(common, match);
    if (tr->parsed()) return RunTracks(common, tracks);
    if (p->parsed()) return RunPipelineCommand(common, pipe);
    if (e->parsed()) return RunEval(common, eval);
    if (gc->parsed()) return RunGradCheck(common, grad);
    if (b->parsed()) return RunBenchmarkCommand(common, bench);
  } catch (const Error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return ExitCodeFor(ex.kind());
  } catch (const json::exception& ex) {
    std::cerr << "error: malformed input: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  std::cerr << app.help();
  return 1;
}

int Dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return Dispatch(args);
}

}  // namespace comatcher
