#include "comatcher/net/comatcher_net.h"

#include <cmath>

#include "comatcher/core/error.h"
#include "comatcher/core/mlp.h"
#include "comatcher/core/ops.h"
#include "comatcher/net/attention.h"

namespace comatcher {
namespace {

Tensor2 ScaledPositions(const NetConfig& cfg, const ImageFeatures& f) {
  const double s = PositionScaleFor(cfg, f);
  Tensor2 p(f.size(), 2);
  for (int k = 0; k < f.size(); ++k) {
    p(k, 0) = static_cast<Scalar>(f.keypoints[k].x * s);
    p(k, 1) = static_cast<Scalar>(f.keypoints[k].y * s);
  }
  return p;
}

}  // namespace

GroupInput MakeGroupInput(const NetConfig& cfg,
                          std::vector<const ImageFeatures*> sources,
                          const ImageFeatures& target,
                          const GroupTracks& tracks) {
  if (sources.empty()) throw Error("shape-mismatch", "no source views");
  if (static_cast<int>(sources.size()) > cfg.max_sources) {
    throw Error("too-many-sources", std::to_string(sources.size()) + " > " +
                                        std::to_string(cfg.max_sources),
                ErrorKind::kUsage);
  }
  if (tracks.num_views() != static_cast<int>(sources.size())) {
    throw Error("shape-mismatch", "tracks do not cover the source views");
  }
  GroupInput in;
  in.target = &target;
  in.tracks = &tracks;
  if (target.dim() != cfg.dim) {
    throw Error("shape-mismatch", target.image_id + " has descriptor dim " +
                                      std::to_string(target.dim()));
  }
  for (size_t i = 0; i < sources.size(); ++i) {
    const ImageFeatures* s = sources[i];
    if (s->dim() != cfg.dim) {
      throw Error("shape-mismatch", s->image_id + " has descriptor dim " +
                                        std::to_string(s->dim()));
    }
    if (tracks.num_points()[i] != s->size()) {
      throw Error("shape-mismatch", "track point count for " + s->image_id);
    }
    in.source_positions.push_back(ScaledPositions(cfg, *s));
  }
  in.sources = std::move(sources);
  in.target_position = ScaledPositions(cfg, target);
  return in;
}

std::vector<PairState> PairBroadcast(ad::Tape& tape, const GroupInput& in) {
  std::vector<PairState> out;
  for (const ImageFeatures* s : in.sources) {
    out.push_back({tape.Constant(s->descriptors),
                   tape.Constant(in.target->descriptors)});
  }
  return out;
}

ad::Var SelfAttention(ad::Tape& tape, const ParamStore& params,
                      const NetConfig& cfg, int layer, ad::Var x,
                      const Tensor2& positions) {
  const std::string pre = BlockPrefix(layer, "self");
  ad::Var basis = tape.Parameter(params, pre + ".rotary");
  const Tensor2 neg = -positions;
  AttentionInputs in;
  in.q = RotateRows(Project(tape, params, pre + ".q", x), neg, basis, cfg.heads);
  in.k = RotateRows(Project(tape, params, pre + ".k", x), neg, basis, cfg.heads);
  in.v = Project(tape, params, pre + ".v", x);
  const ad::Var message =
      AttendValues(AttentionWeights(in, cfg.heads), in.v, cfg.heads);
  return Update(tape, params, pre, x, message);
}

std::vector<ad::Var> SourceCrossAttention(ad::Tape& tape,
                                          const ParamStore& params,
                                          const NetConfig& cfg, int layer,
                                          const GroupInput& input,
                                          const std::vector<ad::Var>& sources,
                                          bool propagation) {
  const int m = static_cast<int>(sources.size());
  if (m < 2) return sources;
  const std::string pre = BlockPrefix(layer, "source_cross");
  ad::Var basis = tape.Parameter(params, pre + ".rotary");
  std::vector<ad::Var> q, k, v, k_rot;
  for (int i = 0; i < m; ++i) {
    q.push_back(Project(tape, params, pre + ".q", sources[i]));
    k.push_back(Project(tape, params, pre + ".k", sources[i]));
    v.push_back(Project(tape, params, pre + ".v", sources[i]));
    if (propagation) {
      k_rot.push_back(RotateRows(k[i], -input.source_positions[i], basis,
                                 cfg.heads));
    }
  }
  const GroupTracks& tracks = *input.tracks;
  std::vector<ad::Var> out;
  for (int i = 0; i < m; ++i) {
    const Eigen::Index n = sources[i].rows();
    std::vector<ad::Var> messages;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      AttentionInputs in;
      in.v = v[j];
      // Rows whose point projects into view j use the relative position
      // p_w - p_v; the rest see plain similarity.
      Tensor2 proj_pos = Tensor2::Zero(n, 2);
      VectorX has = VectorX::Zero(n);
      if (propagation) {
        for (Eigen::Index u = 0; u < n; ++u) {
          const auto w = tracks.Projection(i, static_cast<int>(u), j);
          if (w) {
            proj_pos.row(u) = input.source_positions[j].row(*w);
            has(u) = 1;
          }
        }
      }
      if (has.sum() > 0) {
        in.q = RotateRows(q[i], -proj_pos, basis, cfg.heads);
        in.k = k_rot[j];
        in.q_plain = q[i];
        in.k_plain = k[j];
        in.use_rotated = has;
      } else {
        in.q = q[i];
        in.k = k[j];
      }
      messages.push_back(
          AttendValues(AttentionWeights(in, cfg.heads), v[j], cfg.heads));
    }
    ad::Var message = messages.size() == 1
                          ? messages.front()
                          : ad::Scale(ad::AddAll(messages),
                                      1.0 / static_cast<Scalar>(m - 1));
    out.push_back(Update(tape, params, pre, sources[i], message));
  }
  return out;
}

std::vector<ad::Var> TargetCrossAttention(ad::Tape& tape,
                                          const ParamStore& params,
                                          const NetConfig& cfg, int layer,
                                          const std::vector<ad::Var>& targets) {
  const int m = static_cast<int>(targets.size());
  if (m < 2) return targets;
  const std::string pre = BlockPrefix(layer, "target_cross");
  std::vector<ad::Var> q, k, v;
  for (int i = 0; i < m; ++i) {
    q.push_back(Project(tape, params, pre + ".q", targets[i]));
    k.push_back(Project(tape, params, pre + ".k", targets[i]));
    v.push_back(Project(tape, params, pre + ".v", targets[i]));
  }
  const int heads = cfg.heads;
  const Eigen::Index hd = cfg.head_dim();
  const Scalar scale = 1.0 / std::sqrt(static_cast<Scalar>(hd));
  std::vector<ad::Var> out;
  for (int i = 0; i < m; ++i) {
    std::vector<ad::Var> head_messages;
    for (int h = 0; h < heads; ++h) {
      const ad::Var qi = ad::SliceCols(q[i], h * hd, hd);
      std::vector<ad::Var> scores, values;
      for (int j = 0; j < m; ++j) {
        if (j == i) continue;
        scores.push_back(ad::RowDot(qi, ad::SliceCols(k[j], h * hd, hd)));
        values.push_back(ad::SliceCols(v[j], h * hd, hd));
      }
      const ad::Var w = ad::RowSoftmax(ad::Scale(
          scores.size() == 1 ? scores.front() : ad::ConcatCols(scores),
          scale));
      std::vector<ad::Var> terms;
      for (size_t c = 0; c < values.size(); ++c) {
        terms.push_back(ad::ColumnMul(
            ad::SliceCols(w, static_cast<Eigen::Index>(c), 1), values[c]));
      }
      head_messages.push_back(terms.size() == 1 ? terms.front()
                                                : ad::AddAll(terms));
    }
    const ad::Var message = heads == 1 ? head_messages.front()
                                       : ad::ConcatCols(head_messages);
    out.push_back(Update(tape, params, pre, targets[i], message));
  }
  return out;
}

ad::Var ConfidenceEstimate(ad::Tape& tape, const ParamStore& params,
                           int layer, ad::Var source) {
  return ad::Sigmoid(
      Mlp(tape, params, BlockPrefix(layer, "confidence"), source));
}

void TwoViewCrossAttention(ad::Tape& tape, const ParamStore& params,
                           const NetConfig& cfg, int layer,
                           const GroupInput& input,
                           const std::vector<ad::Var>& confidence,
                           double theta, std::vector<PairState>* states) {
  const int m = static_cast<int>(states->size());
  const std::string pre = BlockPrefix(layer, "cross");
  const int heads = cfg.heads;
  std::vector<ad::Var> qs, ks, vs, qt, kt, vt;
  // Source-as-query distributions of every pair first: the blend needs all
  // of them.
  std::vector<std::vector<ad::Var>> alpha(m);
  for (int i = 0; i < m; ++i) {
    const PairState& st = (*states)[i];
    qs.push_back(Project(tape, params, pre + ".q", st.source));
    ks.push_back(Project(tape, params, pre + ".k", st.source));
    vs.push_back(Project(tape, params, pre + ".v", st.source));
    qt.push_back(Project(tape, params, pre + ".q", st.target));
    kt.push_back(Project(tape, params, pre + ".k", st.target));
    vt.push_back(Project(tape, params, pre + ".v", st.target));
    alpha[i] = AttentionWeights({qs[i], kt[i], vt[i], {}, {}, {}}, heads);
  }
  if (!confidence.empty() && m > 1) {
    for (int h = 0; h < heads; ++h) {
      std::vector<ad::Var> per_head;
      for (int i = 0; i < m; ++i) per_head.push_back(alpha[i][h]);
      const auto blended = MvCorrelate(per_head, confidence, *input.tracks,
                                       theta);
      for (int i = 0; i < m; ++i) alpha[i][h] = blended[i];
    }
  }
  for (int i = 0; i < m; ++i) {
    PairState& st = (*states)[i];
    const ad::Var to_source = AttendValues(alpha[i], vt[i], heads);
    const auto beta = AttentionWeights({qt[i], ks[i], vs[i], {}, {}, {}}, heads);
    const ad::Var to_target = AttendValues(beta, vs[i], heads);
    st = {Update(tape, params, pre, st.source, to_source),
          Update(tape, params, pre, st.target, to_target)};
  }
}

ForwardResult Forward(ad::Tape& tape, const ParamStore& params,
                      const NetConfig& cfg, const GroupInput& input,
                      const ForwardOptions& opt) {
  const std::vector<double> thetas = cfg.Thetas();
  ForwardResult r;
  r.states = PairBroadcast(tape, input);
  const int m = input.num_pairs();
  for (int l = 0; l < cfg.layers; ++l) {
    try {
      for (int i = 0; i < m; ++i) {
        r.states[i].source = SelfAttention(tape, params, cfg, l,
                                           r.states[i].source,
                                           input.source_positions[i]);
        r.states[i].target = SelfAttention(tape, params, cfg, l,
                                           r.states[i].target,
                                           input.target_position);
      }
      std::vector<ad::Var> sources, targets;
      for (const auto& st : r.states) {
        sources.push_back(st.source);
        targets.push_back(st.target);
      }
      if (opt.ablation.source_cross) {
        sources = SourceCrossAttention(tape, params, cfg, l, input, sources,
                                       opt.ablation.propagation);
      }
      targets = TargetCrossAttention(tape, params, cfg, l, targets);
      for (int i = 0; i < m; ++i) r.states[i] = {sources[i], targets[i]};

      const bool has_head = l < cfg.layers - 1;
      std::vector<ad::Var> conf;
      if (has_head) {
        for (int i = 0; i < m; ++i) {
          conf.push_back(ConfidenceEstimate(tape, params, l, sources[i]));
        }
        r.confidence.push_back(conf);
      }
      const bool correlate = has_head && opt.ablation.correlation;
      TwoViewCrossAttention(tape, params, cfg, l, input,
                            correlate ? conf : std::vector<ad::Var>{},
                            has_head ? thetas[l] : 0.0, &r.states);
      if (has_head && opt.keep_snapshots) {
        std::vector<std::pair<Tensor2, Tensor2>> snap;
        for (const auto& st : r.states) {
          snap.emplace_back(st.source.value(), st.target.value());
        }
        r.snapshots.push_back(std::move(snap));
      }
    } catch (const Error& e) {
      throw Error(e.code(), "layer " + std::to_string(l) + ": " + e.what(),
                  e.kind());
    }
  }
  return r;
}

}  // namespace comatcher
