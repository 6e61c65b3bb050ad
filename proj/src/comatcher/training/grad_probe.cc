#include "comatcher/training/grad_probe.h"

#include <random>

#include "comatcher/core/error.h"
#include "comatcher/core/random.h"
#include "comatcher/net/comatcher_net.h"
#include "comatcher/training/losses.h"

namespace comatcher {

GradCheckResult NetworkGradCheck(const NetConfig& config, int num_sources,
                                 int num_points, uint64_t seed,
                                 double epsilon) {
  config.Validate();
  if (num_sources < 1 || num_sources > config.max_sources || num_points < 2) {
    throw Error("invalid-config", "grad check needs 1..max_sources sources "
                "and at least 2 points", ErrorKind::kUsage);
  }
  std::mt19937_64 rng(SplitMix64(seed));
  std::uniform_real_distribution<double> px(0, 60), g(-1, 1);
  auto image = [&](const std::string& id) {
    ImageFeatures f;
    f.image_id = id;
    f.width = 64;
    f.height = 64;
    f.descriptors.resize(num_points, config.dim);
    for (int k = 0; k < num_points; ++k) {
      f.keypoints.push_back({px(rng), px(rng)});
      for (int c = 0; c < config.dim; ++c) f.descriptors(k, c) = g(rng);
      f.descriptors.row(k).normalize();
    }
    return f;
  };
  std::vector<ImageFeatures> sources;
  for (int i = 0; i < num_sources; ++i) {
    sources.push_back(image("s" + std::to_string(i)));
  }
  const ImageFeatures target = image("t");

  // Even points are shared by every view, odd points are unmatched.
  PairMatchMap pairs;
  for (int i = 0; i < num_sources; ++i) {
    for (int j = i + 1; j < num_sources; ++j) {
      for (int k = 0; k < num_points; k += 2) pairs[{i, j}].push_back({k, k});
    }
  }
  const GroupTracks tracks = GroupTracks::Build(
      std::vector<int>(num_sources, num_points), pairs);
  std::vector<GtLabels> labels(num_sources);
  for (auto& l : labels) {
    for (int k = 0; k < num_points; ++k) {
      if (k % 2 == 0) {
        l.matches.push_back({k, k});
      } else {
        l.unmatched_source.push_back(k);
        l.unmatched_target.push_back(k);
      }
    }
  }
  std::vector<const ImageFeatures*> ptrs;
  for (const auto& s : sources) ptrs.push_back(&s);
  const GroupInput input = MakeGroupInput(config, ptrs, target, tracks);
  const ParamStore params = InitNetParams(config, seed);
  const LossBuilder loss = [&](ad::Tape& tape, const ParamStore& p) {
    return ComputeGroupLoss(tape, p, config, input, labels).total;
  };
  return GradCheck(loss, params, epsilon);
}

}  // namespace comatcher
