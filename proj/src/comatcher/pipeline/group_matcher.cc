#include "comatcher/pipeline/group_matcher.h"

namespace comatcher {

std::vector<Tensor2> GroupAssignments(
    const std::vector<const ImageFeatures*>& sources,
    const ImageFeatures& target, const GroupTracks& tracks,
    const ParamStore& params, const NetConfig& cfg,
    const AblationSwitches& ablation) {
  const GroupInput input = MakeGroupInput(cfg, sources, target, tracks);
  ad::Tape tape(false);
  ForwardOptions opt;
  opt.ablation = ablation;
  const ForwardResult fwd = Forward(tape, params, cfg, input, opt);
  std::vector<Tensor2> out;
  for (const auto& st : fwd.states) {
    out.push_back(PredictPair(tape, params, st.source, st.target)
                      .assignment.value());
  }
  return out;
}

std::vector<MatchSet> MatchGroupToTarget(
    const std::vector<const ImageFeatures*>& sources,
    const ImageFeatures& target, const GroupTracks& tracks,
    const ParamStore& params, const NetConfig& cfg,
    const AblationSwitches& ablation) {
  std::vector<MatchSet> out;
  for (const Tensor2& p :
       GroupAssignments(sources, target, tracks, params, cfg, ablation)) {
    out.push_back(FilterMatches(p, cfg.match_threshold));
  }
  return out;
}

}  // namespace comatcher
