#include "comatcher/training/trainer.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "comatcher/core/error.h"
#include "comatcher/core/parallel.h"

namespace comatcher {

void TrainConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error("invalid-config", what, ErrorKind::kUsage);
  };
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    fail("learning_rate must be finite and >= 0");
  }
  if (steps < 0) fail("steps must be >= 0");
  if (batch_scenes < 1) fail("batch_scenes must be >= 1");
  if (!(clip_norm > 0.0)) fail("clip_norm must be > 0");
  if (!(alpha >= 0.0)) fail("alpha must be >= 0");
  if (checkpoint_every < 0) fail("checkpoint_every must be >= 0");
}

TrainSample SampleFromBundle(const SceneBundle& b) {
  const int views = static_cast<int>(b.images.size());
  if (views < 2) throw DataError("too-few-images", "training needs >= 2 views");
  TrainSample s;
  const int m = views - 1;
  s.sources.assign(b.images.begin(), b.images.end() - 1);
  s.target = b.images.back();
  std::vector<int> counts;
  PairMatchMap pm;
  for (int i = 0; i < m; ++i) {
    counts.push_back(s.sources[i].size());
    for (int j = i + 1; j < m; ++j) {
      auto& list = pm[{i, j}];
      for (const auto& [u, w] :
           b.Labels(s.sources[i].image_id, s.sources[j].image_id).matches) {
        list.push_back({u, w});
      }
    }
    s.labels.push_back(b.Labels(s.sources[i].image_id, s.target.image_id));
  }
  s.tracks = GroupTracks::Build(std::move(counts), std::move(pm));
  return s;
}

TrainSample SampleFromScene(const SyntheticScene& scene) {
  return SampleFromBundle(BundleFromScene(scene));
}

namespace {

struct SceneResult {
  LossBreakdown loss;
  std::map<std::string, Tensor2> grads;
};

SceneResult RunScene(const ParamStore& params, const NetConfig& net,
                     const TrainSample& sample, double alpha, bool grads) {
  std::vector<const ImageFeatures*> sources;
  for (const auto& f : sample.sources) sources.push_back(&f);
  const GroupInput input =
      MakeGroupInput(net, sources, sample.target, sample.tracks);
  ad::Tape tape(grads);
  GroupLoss g = ComputeGroupLoss(tape, params, net, input, sample.labels, alpha);
  SceneResult r;
  r.loss = std::move(g.breakdown);
  if (grads && std::isfinite(r.loss.total)) {
    tape.Backward(g.total);
    r.grads = tape.ParameterGradients();
  }
  return r;
}

double Mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

LossBreakdown EvaluateSample(const ParamStore& params, const NetConfig& net,
                             const TrainSample& sample, double alpha) {
  return RunScene(params, net, sample, alpha, false).loss;
}

std::vector<LossRecord> Train(ParamStore* params, const NetConfig& net,
                              const TrainConfig& cfg,
                              const SampleSource& samples,
                              const CheckpointSink& checkpoint) {
  cfg.Validate();
  net.Validate();
  CheckNetParams(net, *params);
  std::vector<LossRecord> curve;
  const size_t batch = static_cast<size_t>(cfg.batch_scenes);
  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<SceneResult> results(batch);
    ParallelFor(batch, cfg.jobs, [&](size_t b) {
      const uint64_t index = static_cast<uint64_t>(step) * batch + b;
      results[b] = RunScene(*params, net, samples(index), cfg.alpha, true);
    });
    LossRecord rec;
    rec.step = step;
    std::map<std::string, Tensor2> grad;
    for (const SceneResult& r : results) {
      if (!std::isfinite(r.loss.total)) {
        throw NumericError("nonfinite-loss",
                           "step " + std::to_string(step));
      }
      rec.total += r.loss.total;
      rec.corr += Mean(r.loss.corr);
      rec.conf += Mean(r.loss.conf);
      for (const auto& [name, g] : r.grads) {
        auto it = grad.find(name);
        if (it == grad.end()) {
          grad.emplace(name, g);
        } else {
          it->second += g;
        }
      }
    }
    const double inv = 1.0 / static_cast<double>(batch);
    rec.total *= inv;
    rec.corr *= inv;
    rec.conf *= inv;
    double norm2 = 0;
    for (auto& [name, g] : grad) {
      g *= static_cast<Scalar>(inv);
      norm2 += static_cast<double>(g.squaredNorm());
    }
    const double norm = std::sqrt(norm2);
    if (!std::isfinite(norm)) {
      throw NumericError("nonfinite-loss",
                         "gradient at step " + std::to_string(step));
    }
    const double scale =
        cfg.learning_rate * (norm > cfg.clip_norm ? cfg.clip_norm / norm : 1.0);
    if (scale != 0.0) {
      for (const auto& [name, g] : grad) {
        params->mutable_value(name) -= static_cast<Scalar>(scale) * g;
      }
    }
    curve.push_back(rec);
    if (checkpoint && cfg.checkpoint_every > 0 &&
        (step + 1) % cfg.checkpoint_every == 0 && step + 1 < cfg.steps) {
      checkpoint(step + 1, *params);
    }
  }
  if (checkpoint) checkpoint(cfg.steps, *params);
  return curve;
}

void WriteLossCsv(const std::string& path,
                  const std::vector<LossRecord>& curve) {
  std::ofstream out(path);
  if (!out) throw DataError("io-error", "cannot write " + path);
  out << "step,total,corr,conf\n";
  char line[160];
  for (const auto& r : curve) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g\n", r.step,
                  r.total, r.corr, r.conf);
    out << line;
  }
}

}  // namespace comatcher
