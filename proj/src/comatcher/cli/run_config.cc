#include "comatcher/cli/run_config.h"

#include "comatcher/core/error.h"
#include "comatcher/core/json_fields.h"
#include "comatcher/features/image_features.h"

namespace comatcher {

namespace {

nlohmann::json TrainToJson(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate},
          {"steps", t.steps},
          {"batch_scenes", t.batch_scenes},
          {"clip_norm", t.clip_norm},
          {"alpha", t.alpha},
          {"checkpoint_every", t.checkpoint_every}};
}

TrainConfig TrainFromJson(const nlohmann::json& j, TrainConfig t) {
  JsonFields f(j, "train");
  f.Get("learning_rate", &t.learning_rate);
  f.Get("steps", &t.steps);
  f.Get("batch_scenes", &t.batch_scenes);
  f.Get("clip_norm", &t.clip_norm);
  f.Get("alpha", &t.alpha);
  f.Get("checkpoint_every", &t.checkpoint_every);
  f.Finish();
  return t;
}

template <typename E>
E EnumFromName(const std::string& scope, const std::string& name,
               const std::vector<std::pair<std::string, E>>& names, E base) {
  if (name.empty()) return base;
  for (const auto& [n, e] : names) {
    if (n == name) return e;
  }
  throw Error("invalid-config", scope + ": " + name, ErrorKind::kUsage);
}

const std::vector<std::pair<std::string, OverlapSource>> kOverlapNames = {
    {"labels", OverlapSource::kLabels},
    {"descriptors", OverlapSource::kDescriptors}};
const std::vector<std::pair<std::string, TargetMatcher>> kMatcherNames = {
    {"learned", TargetMatcher::kLearned},
    {"descriptor", TargetMatcher::kDescriptor}};

template <typename E>
std::string NameOf(const std::vector<std::pair<std::string, E>>& names, E e) {
  for (const auto& [n, v] : names) {
    if (v == e) return n;
  }
  return "";
}

void MergeInto(nlohmann::json* base, const nlohmann::json& patch) {
  if (!patch.is_object() || !base->is_object()) {
    *base = patch;
    return;
  }
  for (const auto& [key, value] : patch.items()) {
    if (value.is_object() && base->contains(key) && (*base)[key].is_object()) {
      MergeInto(&(*base)[key], value);
    } else {
      (*base)[key] = value;
    }
  }
}

}  // namespace

void RunConfig::Validate() const {
  net.Validate();
  TrainConfig t = train;
  t.jobs = 1;
  t.Validate();
  if (scene.num_points < 8 || scene.num_sources < 1) {
    throw Error("invalid-config", "scene needs >= 8 points and >= 1 source",
                ErrorKind::kUsage);
  }
  if (!(grouping.theta_min >= 0 && grouping.theta_min <= grouping.theta_max &&
        grouping.theta_max <= 1) ||
      grouping.max_size < 1) {
    throw Error("invalid-config", "grouping thresholds", ErrorKind::kUsage);
  }
  if (!(verify_px > 0) || !(connect.inlier_px > 0) || connect.min_inliers < 4) {
    throw Error("invalid-config", "verification thresholds",
                ErrorKind::kUsage);
  }
  if (benchmark_seeds < 1 || benchmark_group_size < 1) {
    throw Error("invalid-config", "benchmark sizes", ErrorKind::kUsage);
  }
}

PipelineConfig RunConfig::Pipeline(int jobs) const {
  PipelineConfig p;
  p.overlap = overlap;
  p.grouping = grouping;
  p.connect = connect;
  p.connect.seed = seed;
  p.matcher = matcher;
  p.net = net;
  p.ablation = ablation;
  p.verify_px = verify_px;
  p.seed = seed;
  p.jobs = jobs;
  return p;
}

nlohmann::json RunConfigToJson(const RunConfig& c) {
  return {
      {"seed", c.seed},
      {"scene", SceneConfigToJson(c.scene)},
      {"net", NetConfigToJson(c.net)},
      {"train", TrainToJson(c.train)},
      {"grouping",
       {{"theta_min", c.grouping.theta_min},
        {"theta_max", c.grouping.theta_max},
        {"max_size", c.grouping.max_size}}},
      {"connect",
       {{"min_similarity", c.connect.min_similarity},
        {"inlier_px", c.connect.inlier_px},
        {"min_inliers", c.connect.min_inliers}}},
      {"ablation", AblationToJson(c.ablation)},
      {"pipeline",
       {{"overlap", NameOf(kOverlapNames, c.overlap)},
        {"matcher", NameOf(kMatcherNames, c.matcher)},
        {"verify_px", c.verify_px}}},
      {"benchmark",
       {{"seeds", c.benchmark_seeds},
        {"group_size", c.benchmark_group_size}}}};
}

RunConfig RunConfigFromJson(const nlohmann::json& j, RunConfig c) {
  JsonFields f(j, "");
  f.Get("seed", &c.seed);
  for (const char* key : {"scene", "net", "train", "grouping", "connect",
                          "ablation", "pipeline", "benchmark"}) {
    f.Skip(key);
  }
  f.Finish();
  if (j.contains("scene")) c.scene = SceneConfigFromJson(j["scene"], c.scene);
  if (j.contains("net")) c.net = NetConfigFromJson(j["net"], c.net);
  if (j.contains("train")) c.train = TrainFromJson(j["train"], c.train);
  if (j.contains("ablation")) {
    c.ablation = AblationFromJson(j["ablation"], c.ablation);
  }
  if (j.contains("grouping")) {
    JsonFields g(j["grouping"], "grouping");
    g.Get("theta_min", &c.grouping.theta_min);
    g.Get("theta_max", &c.grouping.theta_max);
    g.Get("max_size", &c.grouping.max_size);
    g.Finish();
  }
  if (j.contains("connect")) {
    JsonFields g(j["connect"], "connect");
    g.Get("min_similarity", &c.connect.min_similarity);
    g.Get("inlier_px", &c.connect.inlier_px);
    g.Get("min_inliers", &c.connect.min_inliers);
    g.Finish();
  }
  if (j.contains("pipeline")) {
    JsonFields g(j["pipeline"], "pipeline");
    std::string overlap, matcher;
    g.Get("overlap", &overlap);
    g.Get("matcher", &matcher);
    g.Get("verify_px", &c.verify_px);
    g.Finish();
    c.overlap = EnumFromName("pipeline.overlap", overlap, kOverlapNames,
                             c.overlap);
    c.matcher = EnumFromName("pipeline.matcher", matcher, kMatcherNames,
                             c.matcher);
  }
  if (j.contains("benchmark")) {
    JsonFields g(j["benchmark"], "benchmark");
    g.Get("seeds", &c.benchmark_seeds);
    g.Get("group_size", &c.benchmark_group_size);
    g.Finish();
  }
  c.train.seed = c.seed;
  c.connect.seed = c.seed;
  return c;
}

void ApplyOverride(nlohmann::json* config, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error("invalid-override", "expected key=value: " + assignment,
                ErrorKind::kUsage);
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  nlohmann::json* node = config;
  size_t start = 0;
  while (true) {
    const size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) {
      throw Error("invalid-override", "empty key segment: " + key,
                  ErrorKind::kUsage);
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    nlohmann::json& child = (*node)[part];
    if (!child.is_object()) child = nlohmann::json::object();
    node = &child;
    start = dot + 1;
  }
}

RunConfig ResolveRunConfig(const std::string& config_path,
                           const std::vector<std::string>& overrides,
                           const nlohmann::json& flag_patch) {
  nlohmann::json j = nlohmann::json::object();
  if (!config_path.empty()) {
    nlohmann::json file;
    try {
      file = ReadJsonFile(config_path);
    } catch (const Error& e) {
      throw Error("bad-config-file", config_path + ": " + e.what(),
                  ErrorKind::kUsage);
    }
    if (!file.is_object()) {
      throw Error("bad-config-file", config_path + " is not an object",
                  ErrorKind::kUsage);
    }
    MergeInto(&j, file);
  }
  for (const auto& s : overrides) ApplyOverride(&j, s);
  if (!flag_patch.is_null()) MergeInto(&j, flag_patch);
  RunConfig c = RunConfigFromJson(j);
  c.Validate();
  return c;
}

}  // namespace comatcher
