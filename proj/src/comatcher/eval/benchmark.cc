#include "comatcher/eval/benchmark.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "comatcher/core/error.h"
#include "comatcher/core/hash.h"
#include "comatcher/core/parallel.h"
#include "comatcher/core/random.h"
#include "comatcher/geometry/homography.h"
#include "comatcher/pipeline/connect.h"
#include "comatcher/pipeline/global_tracks.h"
#include "comatcher/pipeline/group_matcher.h"
#include "comatcher/pipeline/verify.h"

namespace comatcher {

namespace {

const char* KindName(MatcherKind k) {
  return k == MatcherKind::kLearned ? "learned" : "descriptor";
}

// Matches of every source against the target, in source order.
std::vector<MatchSet> MatchTarget(const SyntheticScene& scene,
                                  const GroupTracks& tracks,
                                  const MatcherConfig& m,
                                  const NetConfig& net,
                                  const ParamStore* params) {
  const int num_sources = scene.num_views() - 1;
  const ImageFeatures& target = scene.images[num_sources];
  std::vector<MatchSet> out;
  if (m.kind == MatcherKind::kDescriptor) {
    for (int i = 0; i < num_sources; ++i) {
      out.push_back(DescriptorMatches(scene.images[i], target,
                                      m.min_similarity));
    }
    return out;
  }
  for (int begin = 0; begin < num_sources; begin += m.group_size) {
    const int end = std::min(num_sources, begin + m.group_size);
    std::vector<int> chunk;
    std::vector<const ImageFeatures*> sources;
    for (int i = begin; i < end; ++i) {
      chunk.push_back(i);
      sources.push_back(&scene.images[i]);
    }
    auto sets = MatchGroupToTarget(sources, target, tracks.Restrict(chunk),
                                   *params, net, m.ablation);
    for (auto& s : sets) out.push_back(std::move(s));
  }
  return out;
}

double EstimateCornerError(const MatchSet& matches, const ImageFeatures& src,
                           const ImageFeatures& tgt, const Homography& truth,
                           uint64_t seed) {
  std::vector<Correspondence> corr;
  for (const auto& m : matches.pairs) {
    corr.push_back({src.keypoints[m.u], tgt.keypoints[m.x]});
  }
  if (corr.size() < 4) return std::numeric_limits<double>::infinity();
  RansacOptions opt;
  opt.seed = seed;
  try {
    const RansacResult r = RansacHomography(corr, opt);
    return CornerError(r.model, truth, src.width, src.height);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

std::vector<EvalReport> EvaluateSeed(const BenchmarkConfig& cfg,
                                     uint64_t seed, const ParamStore* params) {
  const SyntheticScene scene = GenerateScene(seed, cfg.scene);
  const int num_sources = scene.num_views() - 1;
  std::vector<const ImageFeatures*> sources;
  for (int i = 0; i < num_sources; ++i) sources.push_back(&scene.images[i]);
  ConnectOptions copt;
  copt.seed = seed;
  std::map<std::pair<int, int>, MatchSet> intra;
  const GroupTracks tracks = ConnectGroup(sources, copt, nullptr, &intra);

  std::vector<EvalReport> reports;
  for (const auto& m : cfg.matchers) {
    const std::vector<MatchSet> raw =
        MatchTarget(scene, tracks, m, cfg.net, params);
    EvalReport rep;
    rep.matcher = m.name;
    rep.seed = seed;
    std::vector<PrecisionRecall> parts;
    std::vector<double> errors;
    std::vector<PairMatches> merged;
    for (const auto& [key, set] : intra) {
      merged.push_back({scene.images[key.first].image_id,
                        scene.images[key.second].image_id, set});
    }
    const ImageFeatures& target = scene.images[num_sources];
    for (int i = 0; i < num_sources; ++i) {
      parts.push_back(
          ComputePrecisionRecall(raw[i], ComputeGtLabels(scene, i, num_sources)));
      const uint64_t pair_seed = SplitMix64(seed ^ SplitMix64(i + 1));
      errors.push_back(EstimateCornerError(raw[i], scene.images[i], target,
                                           scene.Between(i, num_sources),
                                           pair_seed));
      merged.push_back({scene.images[i].image_id, target.image_id,
                        GeometricVerify(raw[i], scene.images[i], target, 3.0,
                                        pair_seed)});
    }
    rep.pr = Pool(parts);
    rep.auc = CornerAuc(errors);
    rep.tracks = ComputeTrackStats(MergeTracks(merged));
    reports.push_back(std::move(rep));
  }
  return reports;
}

nlohmann::json MeanStdToJson(const MeanStd& m) {
  return {{"mean", m.mean}, {"std", m.stddev}};
}

}  // namespace

std::vector<MatcherConfig> AblationMatchers(int group_size) {
  std::vector<MatcherConfig> out(4);
  out[0].name = "full";
  out[1].name = "no_source_cross";
  out[1].ablation.source_cross = false;
  out[2].name = "no_propagation";
  out[2].ablation.propagation = false;
  out[3].name = "no_correlation";
  out[3].ablation.correlation = false;
  for (auto& m : out) m.group_size = group_size;
  return out;
}

BenchmarkResult RunBenchmark(const BenchmarkConfig& cfg,
                             const ParamStore* params) {
  if (cfg.seeds.empty()) throw Error("empty-eval", "no seeds");
  if (cfg.matchers.empty()) throw Error("empty-eval", "no matchers");
  for (const auto& m : cfg.matchers) {
    if (m.group_size < 1) {
      throw Error("invalid-config", "group_size must be >= 1",
                  ErrorKind::kUsage);
    }
    if (m.kind == MatcherKind::kLearned && params == nullptr) {
      throw Error("no-checkpoint", "matcher " + m.name + " needs weights",
                  ErrorKind::kUsage);
    }
  }
  cfg.net.Validate();

  std::vector<std::vector<EvalReport>> slots(cfg.seeds.size());
  ParallelFor(cfg.seeds.size(), cfg.jobs, [&](size_t k) {
    slots[k] = EvaluateSeed(cfg, cfg.seeds[k], params);
  });

  BenchmarkResult result;
  for (size_t mi = 0; mi < cfg.matchers.size(); ++mi) {
    std::vector<double> p, r, a1, a3, a5, nl, tl;
    for (const auto& seed_reports : slots) {
      const EvalReport& rep = seed_reports[mi];
      result.reports.push_back(rep);
      p.push_back(rep.pr.precision);
      r.push_back(rep.pr.recall);
      a1.push_back(rep.auc[0]);
      a3.push_back(rep.auc[1]);
      a5.push_back(rep.auc[2]);
      nl.push_back(rep.tracks.num_landmarks);
      tl.push_back(rep.tracks.mean_track_length);
    }
    result.summary.push_back({cfg.matchers[mi].name, ComputeMeanStd(p),
                              ComputeMeanStd(r), ComputeMeanStd(a1),
                              ComputeMeanStd(a3), ComputeMeanStd(a5),
                              ComputeMeanStd(nl), ComputeMeanStd(tl)});
  }
  result.config_hash = Sha1Hex(BenchmarkConfigToJson(cfg).dump());
  if (!cfg.checkpoint_path.empty()) {
    result.checkpoint_hash = GitBlobSha1(ReadFileBytes(cfg.checkpoint_path));
  }
  return result;
}

nlohmann::json BenchmarkConfigToJson(const BenchmarkConfig& cfg) {
  nlohmann::json matchers = nlohmann::json::array();
  for (const auto& m : cfg.matchers) {
    matchers.push_back({{"name", m.name},
                        {"kind", KindName(m.kind)},
                        {"ablation", AblationToJson(m.ablation)},
                        {"group_size", m.group_size},
                        {"min_similarity", m.min_similarity}});
  }
  return {{"scene", SceneConfigToJson(cfg.scene)},
          {"seeds", cfg.seeds},
          {"matchers", matchers},
          {"net", NetConfigToJson(cfg.net)},
          {"checkpoint",
           std::filesystem::path(cfg.checkpoint_path).filename().string()}};
}

nlohmann::json BenchmarkToJson(const BenchmarkResult& res) {
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& r : res.reports) {
    reports.push_back({{"matcher", r.matcher},
                       {"seed", r.seed},
                       {"precision", r.pr.precision},
                       {"recall", r.pr.recall},
                       {"correct", r.pr.correct},
                       {"considered", r.pr.considered},
                       {"gt", r.pr.gt},
                       {"auc", r.auc},
                       {"NL", r.tracks.num_landmarks},
                       {"TL", r.tracks.mean_track_length}});
  }
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& s : res.summary) {
    summary.push_back({{"matcher", s.matcher},
                       {"precision", MeanStdToJson(s.precision)},
                       {"recall", MeanStdToJson(s.recall)},
                       {"auc1", MeanStdToJson(s.auc1)},
                       {"auc3", MeanStdToJson(s.auc3)},
                       {"auc5", MeanStdToJson(s.auc5)},
                       {"NL", MeanStdToJson(s.nl)},
                       {"TL", MeanStdToJson(s.tl)}});
  }
  return {{"config_hash", res.config_hash},
          {"checkpoint_hash", res.checkpoint_hash},
          {"summary", summary},
          {"reports", reports}};
}

void WriteBenchmarkCsv(const std::string& path, const BenchmarkResult& res) {
  std::ofstream out(path);
  if (!out) throw Error("io-error", "cannot write " + path, ErrorKind::kData);
  out << "matcher,precision_mean,precision_std,recall_mean,recall_std,"
         "auc1_mean,auc1_std,auc3_mean,auc3_std,auc5_mean,auc5_std,"
         "nl_mean,nl_std,tl_mean,tl_std\n";
  char buf[64];
  auto put = [&](const MeanStd& m) {
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", m.mean, m.stddev);
    out << buf;
  };
  for (const auto& s : res.summary) {
    out << s.matcher;
    put(s.precision);
    put(s.recall);
    put(s.auc1);
    put(s.auc3);
    put(s.auc5);
    put(s.nl);
    put(s.tl);
    out << "\n";
  }
}

}  // namespace comatcher
