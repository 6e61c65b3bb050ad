#include "comatcher/net/net_config.h"

#include <algorithm>

#include "comatcher/core/error.h"
#include "comatcher/core/json_fields.h"
#include "comatcher/core/mlp.h"

namespace comatcher {

std::vector<double> DefaultThetaSchedule(int layers) {
  const int n = std::max(0, layers - 1);
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) {
    out[k] = n == 1 ? 0.1 : 0.1 + 0.7 * k / (n - 1);
  }
  return out;
}

std::vector<double> NetConfig::Thetas() const {
  return theta_schedule.empty() ? DefaultThetaSchedule(layers)
                                : theta_schedule;
}

void NetConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error("invalid-config", what, ErrorKind::kUsage);
  };
  if (dim <= 0 || heads <= 0 || dim % (2 * heads) != 0) {
    fail("dim must be a positive multiple of 2 * heads");
  }
  if (layers < 2) fail("layers must be >= 2");
  if (max_sources < 1) fail("max_sources must be >= 1");
  const auto thetas = Thetas();
  if (static_cast<int>(thetas.size()) != layers - 1) {
    fail("theta_schedule needs layers - 1 entries");
  }
  for (size_t k = 0; k < thetas.size(); ++k) {
    if (!(thetas[k] > 0.0 && thetas[k] < 1.0)) fail("theta outside (0,1)");
    if (k > 0 && thetas[k] < thetas[k - 1]) fail("theta must not decrease");
  }
  if (!(match_threshold > 0.0 && match_threshold < 1.0)) {
    fail("match_threshold outside (0,1)");
  }
}

nlohmann::json NetConfigToJson(const NetConfig& c) {
  return {{"dim", c.dim},
          {"layers", c.layers},
          {"heads", c.heads},
          {"max_sources", c.max_sources},
          {"theta_schedule", c.Thetas()},
          {"match_threshold", c.match_threshold},
          {"position_scale",
           c.position_scale == PositionScale::kImage ? "image" : "pixels"}};
}

NetConfig NetConfigFromJson(const nlohmann::json& j, NetConfig c,
                            const std::string& scope) {
  JsonFields f(j, scope);
  f.Get("dim", &c.dim);
  f.Get("layers", &c.layers);
  f.Get("heads", &c.heads);
  f.Get("max_sources", &c.max_sources);
  f.Get("theta_schedule", &c.theta_schedule);
  f.Get("match_threshold", &c.match_threshold);
  std::string scale;
  f.Get("position_scale", &scale);
  if (scale == "image") {
    c.position_scale = PositionScale::kImage;
  } else if (scale == "pixels") {
    c.position_scale = PositionScale::kPixels;
  } else if (!scale.empty()) {
    throw Error("invalid-config", f.Name("position_scale") + ": " + scale,
                ErrorKind::kUsage);
  }
  f.Finish();
  return c;
}

nlohmann::json AblationToJson(const AblationSwitches& a) {
  return {{"source_cross", a.source_cross},
          {"propagation", a.propagation},
          {"correlation", a.correlation}};
}

AblationSwitches AblationFromJson(const nlohmann::json& j, AblationSwitches a,
                                  const std::string& scope) {
  JsonFields f(j, scope);
  f.Get("source_cross", &a.source_cross);
  f.Get("propagation", &a.propagation);
  f.Get("correlation", &a.correlation);
  f.Finish();
  return a;
}

std::string BlockPrefix(int layer, const std::string& block) {
  return "layers." + std::to_string(layer) + "." + block;
}

namespace {

const char* const kBlocks[] = {"self", "source_cross", "target_cross",
                               "cross"};

bool HasRotary(const std::string& block) {
  return block == "self" || block == "source_cross";
}

}  // namespace

ParamStore InitNetParams(const NetConfig& cfg, uint64_t seed) {
  cfg.Validate();
  ParamStore p(seed);
  const int d = cfg.dim;
  for (int l = 0; l < cfg.layers; ++l) {
    for (const std::string block : kBlocks) {
      const std::string pre = BlockPrefix(l, block);
      for (const char* proj : {".q", ".k", ".v"}) {
        p.AddUniform(pre + proj + ".weight", d, d, d);
        p.AddUniform(pre + proj + ".bias", 1, d, d);
      }
      if (HasRotary(block)) {
        p.AddUniform(pre + ".rotary", cfg.head_dim() / 2, 2, 2);
      }
      AddMlpParams(&p, pre + ".update", {2 * d, 2 * d, d});
    }
    if (l < cfg.layers - 1) {
      AddMlpParams(&p, BlockPrefix(l, "confidence"), {d, 2 * d, 1});
    }
  }
  p.AddUniform("head.proj.weight", d, d, d);
  p.AddUniform("head.proj.bias", 1, d, d);
  p.AddUniform("head.matchability.weight", d, 1, d);
  p.AddUniform("head.matchability.bias", 1, 1, d);
  return p;
}

void CheckNetParams(const NetConfig& cfg, const ParamStore& p) {
  const int d = cfg.dim;
  auto check = [&](const std::string& name, Eigen::Index r, Eigen::Index c) {
    if (!p.Contains(name)) throw Error("shape-mismatch", "missing " + name);
    CheckShape(p.value(name), r, c, name);
  };
  auto check_mlp = [&](const std::string& pre, int in, int hidden, int out) {
    check(pre + ".fc1.weight", in, hidden);
    check(pre + ".fc1.bias", 1, hidden);
    check(pre + ".norm.gamma", 1, hidden);
    check(pre + ".norm.beta", 1, hidden);
    check(pre + ".fc2.weight", hidden, out);
    check(pre + ".fc2.bias", 1, out);
  };
  for (int l = 0; l < cfg.layers; ++l) {
    for (const std::string block : kBlocks) {
      const std::string pre = BlockPrefix(l, block);
      for (const char* proj : {".q", ".k", ".v"}) {
        check(pre + proj + ".weight", d, d);
        check(pre + proj + ".bias", 1, d);
      }
      if (HasRotary(block)) check(pre + ".rotary", cfg.head_dim() / 2, 2);
      check_mlp(pre + ".update", 2 * d, 2 * d, d);
    }
    if (l < cfg.layers - 1) {
      check_mlp(BlockPrefix(l, "confidence"), d, 2 * d, 1);
    }
  }
  check("head.proj.weight", d, d);
  check("head.proj.bias", 1, d);
  check("head.matchability.weight", d, 1);
  check("head.matchability.bias", 1, 1);
}

double PositionScaleFor(const NetConfig& cfg, const ImageFeatures& image) {
  if (cfg.position_scale == PositionScale::kPixels) return 1.0;
  const double extent = std::max(image.width, image.height);
  return extent > 0.0 ? 2.0 / extent : 1.0;
}

}  // namespace comatcher
